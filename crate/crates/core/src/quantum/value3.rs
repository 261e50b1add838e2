//! Three-turn values: an outer search over the committed first-register
//! state, with the fiber game solved at every probe.

use std::f64::consts::PI;

use super::game::{GameValueReport, QuantumGame};
use super::mmw::{
    check_tol, fiber_dims, fiber_game, fiber_lower_bound, value2_fiber_with, value2_with, MmwConfig, Order, Plane,
};
use crate::error::{Error, Result};
use crate::linops::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value3Config {
    /// Bloch-ball grid: radii in (0, 1], polar and azimuthal angles. The
    /// centre is always included.
    pub radii: usize,
    pub polar: usize,
    pub azimuth: usize,
    /// Iterations of the dynamics per grid point while screening; the
    /// screen ranks points by their certified lower bound.
    pub screen_iterations: usize,
    /// Step-halving rounds of coordinate search; 0 keeps the grid result.
    pub refine_rounds: usize,
    /// Cap on the cutting-plane phase that closes the outer gap; 0 skips it.
    pub cut_iterations: usize,
    pub mmw: MmwConfig,
}

impl Default for Value3Config {
    fn default() -> Self {
        Value3Config {
            radii: 10,
            polar: 10,
            azimuth: 10,
            screen_iterations: 20,
            refine_rounds: 3,
            cut_iterations: 400,
            mmw: MmwConfig::default(),
        }
    }
}

impl Value3Config {
    pub fn grid_points(&self) -> usize {
        self.radii * self.polar * self.azimuth + 1
    }
}

/// Outer-search outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Value3Outcome {
    pub report: GameValueReport,
    /// Bloch vector of the best first-register state found.
    pub bloch: [f64; 3],
    /// Fiber games solved, screening included.
    pub evaluations: usize,
}

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(v: Vec3) -> f64 {
    dot(v, v).sqrt()
}

fn spherical(r: f64, theta: f64, phi: f64) -> Vec3 {
    [
        r * theta.sin() * phi.cos(),
        r * theta.sin() * phi.sin(),
        r * theta.cos(),
    ]
}

fn clip_to_ball(b: Vec3) -> Vec3 {
    let n = norm(b);
    if n > 1.0 {
        [b[0] / n, b[1] / n, b[2] / n]
    } else {
        b
    }
}

/// Coordinate axes plus the cube diagonals, so ridges that are not aligned
/// with an axis can still be climbed.
fn poll_directions() -> Vec<Vec3> {
    let mut out = Vec::with_capacity(14);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut d = [0.0; 3];
            d[axis] = sign;
            out.push(d);
        }
    }
    let s = 1.0 / 3f64.sqrt();
    for x in [s, -s] {
        for y in [s, -s] {
            for z in [s, -s] {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Majorant b ↦ offset + grad·b of the fiber value on the whole ball.
#[derive(Debug, Clone, Copy)]
struct Cut {
    grad: Vec3,
    offset: f64,
}

impl Cut {
    fn from_plane((c, y): Plane) -> Cut {
        let off = y[(0, 1)];
        Cut {
            grad: [off.re, -off.im, 0.5 * (y[(0, 0)].re - y[(1, 1)].re)],
            offset: c + 0.5 * (y[(0, 0)].re + y[(1, 1)].re),
        }
    }

    fn at(&self, b: Vec3) -> f64 {
        self.offset + dot(self.grad, b)
    }
}

/// {x : (x − c)ᵀP⁻¹(x − c) ≤ 1}.
struct Ellipsoid {
    c: Vec3,
    p: [[f64; 3]; 3],
}

enum CutOutcome {
    Empty,
    Kept,
}

impl Ellipsoid {
    fn unit_ball() -> Self {
        Ellipsoid {
            c: [0.0; 3],
            p: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    fn pa(&self, a: Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.p[i], a);
        }
        out
    }

    /// max over the ellipsoid of a·(x − c).
    fn width(&self, a: Vec3) -> f64 {
        dot(a, self.pa(a)).max(0.0).sqrt()
    }

    /// Keeps {x : a·(x − c) ≤ −h} by the minimum-volume enclosing update.
    fn cut(&mut self, a: Vec3, h: f64) -> CutOutcome {
        const N: f64 = 3.0;
        let w = self.width(a);
        if w <= 0.0 {
            return if h > 0.0 { CutOutcome::Empty } else { CutOutcome::Kept };
        }
        let alpha = h / w;
        if alpha >= 1.0 {
            return CutOutcome::Empty;
        }
        if alpha <= -1.0 / N {
            return CutOutcome::Kept;
        }
        let pa = self.pa(a);
        let bt = [pa[0] / w, pa[1] / w, pa[2] / w];
        let shift = (1.0 + N * alpha) / (N + 1.0);
        for (c, b) in self.c.iter_mut().zip(bt) {
            *c -= shift * b;
        }
        let scale = N * N * (1.0 - alpha * alpha) / (N * N - 1.0);
        let rank1 = 2.0 * (1.0 + N * alpha) / ((N + 1.0) * (1.0 + alpha));
        for i in 0..3 {
            for j in 0..3 {
                self.p[i][j] = scale * (self.p[i][j] - rank1 * bt[i] * bt[j]);
            }
        }
        CutOutcome::Kept
    }

    /// Removes the points where `cut` lies below `level`.
    fn cut_below(&mut self, cut: &Cut, level: f64) -> CutOutcome {
        let g = cut.grad;
        self.cut([-g[0], -g[1], -g[2]], level - cut.at(self.c))
    }
}

struct Probe<'a> {
    game: &'a QuantumGame,
    cfg: &'a Value3Config,
    evaluations: usize,
    cuts: Vec<Cut>,
}

impl Probe<'_> {
    /// Fiber game at `b`, abandoned once it cannot beat `cutoff`. Its
    /// majorant is kept.
    fn eval(&mut self, b: Vec3, tol: f64, cutoff: f64) -> Result<(GameValueReport, Option<Cut>)> {
        self.evaluations += 1;
        let rho1 = DensityMatrix::from_bloch(clip_to_ball(b))?;
        let (rep, plane) = fiber_game(self.game, &rho1, Order::MaxThenMin, tol, &self.cfg.mmw, cutoff)?;
        let cut = plane.map(Cut::from_plane);
        self.cuts.extend(cut);
        Ok((rep, cut))
    }

    fn screen(&mut self, b: Vec3) -> Result<f64> {
        self.evaluations += 1;
        let rho1 = DensityMatrix::from_bloch(clip_to_ball(b))?;
        fiber_lower_bound(self.game, &rho1, self.cfg.screen_iterations, &self.cfg.mmw)
    }

    /// Bound on every value in `region` ∩ ball, given that points outside
    /// `region` are known not to beat `lower`.
    fn upper(&self, region: Option<&Ellipsoid>, lower: f64) -> f64 {
        let Some(e) = region else {
            return lower;
        };
        self.cuts
            .iter()
            .map(|c| (c.at(e.c) + e.width(c.grad)).min(c.offset + norm(c.grad)))
            .fold(f64::INFINITY, f64::min)
            .max(lower)
    }
}

/// max over ρ₁ of the fiber game value, first register restricted to one qubit.
pub fn value3(game: &QuantumGame, tol: f64) -> Result<GameValueReport> {
    value3_with(game, tol, &Value3Config::default()).map(|o| o.report)
}

/// Grid screening and pattern search find a good first-register state; its
/// certified fiber value is reported. The fiber value is concave in ρ₁, so
/// every solve also yields an affine majorant on the whole ball, and an
/// ellipsoid cutting-plane phase uses these to certify the upper bound.
pub fn value3_with(game: &QuantumGame, tol: f64, cfg: &Value3Config) -> Result<Value3Outcome> {
    check_tol(tol)?;
    let (d1, _) = fiber_dims(game)?;
    if d1 != 2 {
        return Err(Error::precondition(format!(
            "the outer search needs a one-qubit first register, got dimension {d1}"
        )));
    }
    if cfg.radii == 0 || cfg.polar == 0 || cfg.azimuth == 0 {
        return Err(Error::input("grid sizes must be positive"));
    }
    let mut probe = Probe {
        game,
        cfg,
        evaluations: 0,
        cuts: Vec::new(),
    };

    // Screening pass; index (i, j, k) ↦ radius (i+1)/radii, polar and azimuth cells.
    let dr = 1.0 / cfg.radii as f64;
    let dtheta = PI / cfg.polar as f64;
    let dphi = 2.0 * PI / cfg.azimuth as f64;
    let at = |i: usize, j: usize, k: usize| spherical((i + 1) as f64 * dr, (j as f64 + 0.5) * dtheta, k as f64 * dphi);
    let mut best_screen = (probe.screen([0.0; 3])?, [0.0; 3]);
    for i in 0..cfg.radii {
        for j in 0..cfg.polar {
            for k in 0..cfg.azimuth {
                let v = probe.screen(at(i, j, k))?;
                if v > best_screen.0 {
                    best_screen = (v, at(i, j, k));
                }
            }
        }
    }

    let mut best_b = best_screen.1;
    let mut best = probe.eval(best_b, tol, f64::NEG_INFINITY)?.0;

    // Pattern search in Bloch coordinates, steps halved each round.
    let directions = poll_directions();
    let mut step = dr;
    for _ in 0..cfg.refine_rounds {
        let mut moved = true;
        while moved {
            moved = false;
            for dir in &directions {
                let b = clip_to_ball([
                    best_b[0] + step * dir[0],
                    best_b[1] + step * dir[1],
                    best_b[2] + step * dir[2],
                ]);
                if b == best_b {
                    continue;
                }
                let rep = probe.eval(b, tol, best.lower_cert)?.0;
                if rep.gap <= tol && rep.lower_cert > best.lower_cert + 1e-12 {
                    best = rep;
                    best_b = b;
                    moved = true;
                }
            }
        }
        step *= 0.5;
    }

    // Cutting planes. The region always holds every point whose value could
    // exceed `level`, so the majorants bound the value there and `level`
    // bounds it elsewhere.
    let mut lower = best.lower_cert;
    let mut level = lower + 0.5 * tol;
    let mut region = Some(Ellipsoid::unit_ball());
    for c in probe.cuts.clone() {
        if let Some(e) = region.as_mut() {
            if let CutOutcome::Empty = e.cut_below(&c, level) {
                region = None;
            }
        }
    }
    for _ in 0..cfg.cut_iterations {
        let Some(e) = region.as_mut() else { break };
        if probe.upper(Some(e), level) - lower <= tol {
            break;
        }
        let c = e.c;
        let r = norm(c);
        let outcome = if r > 1.0 - 1e-9 {
            e.cut([c[0] / r, c[1] / r, c[2] / r], r - 1.0)
        } else {
            // Majorants within tol/4 of the value keep every cut deep.
            let (rep, cut) = probe.eval(c, 0.25 * tol, level)?;
            if rep.lower_cert > lower {
                lower = rep.lower_cert;
                level = lower + 0.5 * tol;
                best = rep;
                best_b = c;
            }
            match cut {
                Some(cut) => e.cut_below(&cut, level),
                None => break,
            }
        };
        if let CutOutcome::Empty = outcome {
            region = None;
        }
    }
    let upper = probe.upper(region.as_ref(), level);

    Ok(Value3Outcome {
        report: GameValueReport {
            value: lower,
            lower_cert: lower,
            upper_cert: upper,
            gap: upper - lower,
            iterations: best.iterations,
        },
        bloch: best_b,
        evaluations: probe.evaluations,
    })
}

/// |value3 − value2 of the game with both maximizer registers merged|.
pub fn collapse_gap(game: &QuantumGame, tol: f64) -> Result<f64> {
    collapse_gap_with(game, tol, &Value3Config::default())
}

pub fn collapse_gap_with(game: &QuantumGame, tol: f64, cfg: &Value3Config) -> Result<f64> {
    let v3 = value3_with(game, tol, cfg)?.report;
    let v2 = value2_with(&game.merged()?, tol, &cfg.mmw)?;
    Ok((v3.value - v2.value).abs())
}

/// |min-then-max − max-then-min| of the fiber game at `rho1`.
pub fn sion_gap(game: &QuantumGame, rho1: &DensityMatrix, tol: f64) -> Result<f64> {
    sion_gap_with(game, rho1, tol, &MmwConfig::default())
}

pub fn sion_gap_with(game: &QuantumGame, rho1: &DensityMatrix, tol: f64, cfg: &MmwConfig) -> Result<f64> {
    let a = value2_fiber_with(game, rho1, Order::MinThenMax, tol, cfg)?;
    let b = value2_fiber_with(game, rho1, Order::MaxThenMin, tol, cfg)?;
    Ok((a.value - b.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::eigh;
    use crate::linops::{random_density, random_observable, tensor, ComplexMatrix, Observable};
    use crate::quantum::effective::contract_max;

    fn small() -> Value3Config {
        Value3Config {
            radii: 4,
            polar: 4,
            azimuth: 4,
            ..Default::default()
        }
    }

    #[test]
    fn default_grid_has_enough_points() {
        assert!(Value3Config::default().grid_points() >= 1000);
    }

    #[test]
    fn constant_game() {
        let game = QuantumGame::three_turn(Observable::identity(8), 1, 1, 1).unwrap();
        let out = value3_with(&game, 1e-4, &small()).unwrap();
        assert!((out.report.value - 1.0).abs() < 1e-4);
        assert!(collapse_gap_with(&game, 1e-4, &small()).unwrap() < 1e-4);
    }

    #[test]
    fn wide_first_register_rejected() {
        let game = QuantumGame::three_turn(Observable::identity(16), 2, 1, 1).unwrap();
        assert!(matches!(value3(&game, 1e-3), Err(Error::Precondition(_))));
    }

    #[test]
    fn extension_irrelevant() {
        // Factor order is X1, X2, Y1; R = R′(X1,Y1) with X2 idle.
        let rp = random_observable(4, 3);
        let r = ComplexMatrix::from_fn(8, |i, j| {
            let (x1, x2, y) = (i / 4, (i / 2) % 2, i % 2);
            let (x1p, x2p, yp) = (j / 4, (j / 2) % 2, j % 2);
            if x2 == x2p {
                rp.matrix()[(x1 * 2 + y, x1p * 2 + yp)]
            } else {
                crate::linops::matrix::C_ZERO
            }
        });
        let game = QuantumGame::three_turn(Observable::new(r).unwrap(), 1, 1, 1).unwrap();
        let v3 = value3(&game, 1e-4).unwrap();
        let v2 = value2_with(&QuantumGame::two_turn(rp, 1, 1).unwrap(), 1e-4, &MmwConfig::default()).unwrap();
        assert!((v3.value - v2.value).abs() < 1e-3, "{} vs {}", v3.value, v2.value);
    }

    #[test]
    fn dominates_product_extensions() {
        let game = QuantumGame::three_turn(random_observable(8, 17), 1, 1, 1).unwrap();
        let v3 = value3(&game, 1e-4).unwrap();
        for s in 0..20 {
            let rho1 = random_density(2, 900 + s);
            let tau = random_density(2, 950 + s);
            let rho = tensor(rho1.matrix(), tau.matrix());
            let f = contract_max(game.observable().matrix(), 4, 2, &rho).hermitian_part();
            assert!(eigh(&f).unwrap().min() <= v3.upper_cert + 1e-10);
            assert!(eigh(&f).unwrap().min() <= v3.value + 1e-3);
        }
    }

    #[test]
    fn majorant_dominates_fiber_values() {
        let game = QuantumGame::three_turn(random_observable(8, 31), 1, 1, 1).unwrap();
        let rho1 = DensityMatrix::from_bloch([0.3, -0.2, 0.4]).unwrap();
        let (_, plane) = fiber_game(
            &game,
            &rho1,
            Order::MaxThenMin,
            1e-4,
            &MmwConfig::default(),
            f64::NEG_INFINITY,
        )
        .unwrap();
        let cut = Cut::from_plane(plane.unwrap());
        for s in 0..15 {
            let other = random_density(2, 600 + s);
            let b = other.bloch_vector().unwrap();
            let v = value2_fiber_with(&game, &other, Order::MaxThenMin, 1e-3, &MmwConfig::default()).unwrap();
            assert!(
                v.lower_cert <= cut.at(b) + 1e-10,
                "{} above majorant {}",
                v.lower_cert,
                cut.at(b)
            );
        }
    }

    #[test]
    fn ellipsoid_cut_keeps_the_halfspace() {
        let mut e = Ellipsoid::unit_ball();
        let inside = |e: &Ellipsoid, x: Vec3| {
            let d = [x[0] - e.c[0], x[1] - e.c[1], x[2] - e.c[2]];
            // Solve P y = d by Cramer's rule for the quadratic form.
            let p = e.p;
            let det = p[0][0] * (p[1][1] * p[2][2] - p[1][2] * p[2][1])
                - p[0][1] * (p[1][0] * p[2][2] - p[1][2] * p[2][0])
                + p[0][2] * (p[1][0] * p[2][1] - p[1][1] * p[2][0]);
            let col = |k: usize| {
                let mut m = p;
                for (i, row) in m.iter_mut().enumerate() {
                    row[k] = d[i];
                }
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let y = [col(0) / det, col(1) / det, col(2) / det];
            dot(d, y) <= 1.0 + 1e-9
        };
        let cuts = [
            ([1.0, 0.0, 0.0], 0.2),
            ([0.3, -0.5, 0.8], -0.1),
            ([0.0, 1.0, 1.0], 0.05),
        ];
        let mut kept: Vec<Vec3> = Vec::new();
        for i in 0..2000 {
            let t = i as f64;
            let x = spherical(
                (t * 0.618).fract(),
                (t * 0.414).fract() * PI,
                (t * 0.732).fract() * 2.0 * PI,
            );
            kept.push(x);
        }
        for (a, h) in cuts {
            let c0 = e.c;
            kept.retain(|&x| dot(a, [x[0] - c0[0], x[1] - c0[1], x[2] - c0[2]]) <= -h);
            assert!(matches!(e.cut(a, h), CutOutcome::Kept));
            for &x in &kept {
                assert!(inside(&e, x));
            }
        }
        assert!(!kept.is_empty());
        assert!(matches!(e.cut([1.0, 0.0, 0.0], 10.0), CutOutcome::Empty));
    }

    #[test]
    fn certificates_bracket_merged_value() {
        let game = QuantumGame::three_turn(random_observable(8, 26), 1, 1, 1).unwrap();
        let out = value3_with(&game, 1e-4, &Value3Config::default()).unwrap();
        let v2 = value2_with(&game.merged().unwrap(), 1e-5, &MmwConfig::default()).unwrap();
        assert!(out.report.gap <= 1e-4);
        assert!(out.report.lower_cert <= v2.upper_cert + 1e-12);
        assert!(out.report.upper_cert >= v2.lower_cert - 1e-12);
        assert!((out.report.value - v2.value).abs() <= 1e-3);
    }

    #[test]
    fn sion_gap_small() {
        let game = QuantumGame::three_turn(random_observable(8, 23), 1, 1, 1).unwrap();
        let g = sion_gap(&game, &random_density(2, 24), 1e-4).unwrap();
        assert!(g <= 2e-4);
    }
}
