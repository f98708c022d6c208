//! Scene geometry: the map between scatterer/target geometry and per-path
//! channel parameters (delays and angles), its LOS/NLOS inverses used for
//! initialization, and the frequency-separation report.
//!
//! Conventions: 2-D scenes, angles in radians wrapped to (−π, π], delays in
//! seconds. Path index 0 is always the LOS path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{circ_dist, wrap_angle};
use crate::signal::SystemConfig;

/// Coincidence tolerance for scene points and ray denominators, in the
/// respective natural units (m, unitless tan difference).
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A point in the horizontal plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Ground-truth scene: BS position, target position and array orientation,
/// and one scatterer per NLOS path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneConfig {
    pub bs: Point2D,
    pub target: Point2D,
    /// Target array orientation, radians.
    pub orientation: f64,
    pub scatterers: Vec<Point2D>,
}

impl SceneConfig {
    /// Check the scene invariants: target distinct from BS, every scatterer
    /// distinct from both endpoints.
    pub fn validate(&self) -> Result<()> {
        if self.target.dist(&self.bs) < DEGENERACY_TOL {
            return Err(Error::DegenerateGeometry(
                "target coincides with BS".into(),
            ));
        }
        for (k, s) in self.scatterers.iter().enumerate() {
            if s.dist(&self.bs) < DEGENERACY_TOL {
                return Err(Error::DegenerateGeometry(format!(
                    "scatterer {k} coincides with BS"
                )));
            }
            if s.dist(&self.target) < DEGENERACY_TOL {
                return Err(Error::DegenerateGeometry(format!(
                    "scatterer {k} coincides with target"
                )));
            }
        }
        Ok(())
    }
}

/// Per-path channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    /// Time of arrival, seconds.
    pub toa: f64,
    /// Angle of departure at the BS, radians in (−π, π].
    pub aod: f64,
    /// Angle of arrival at the target, radians in (−π, π].
    pub aoa: f64,
}

/// Channel parameters with complex path gains; index 0 is the LOS path.
#[derive(Debug, Clone)]
pub struct ChannelParams {
    pub paths: Vec<PathParams>,
    pub gains: Vec<Complex64>,
}

impl ChannelParams {
    pub fn new(paths: Vec<PathParams>, gains: Vec<Complex64>) -> Result<Self> {
        if paths.len() != gains.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} paths but {} gains",
                paths.len(),
                gains.len()
            )));
        }
        Ok(Self { paths, gains })
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }
}

fn path_params(scene: &SceneConfig, c: f64, wrap: bool) -> Vec<PathParams> {
    let q = scene.bs;
    let p = scene.target;
    let mut out = Vec::with_capacity(1 + scene.scatterers.len());

    let los_dir = (p.y - q.y).atan2(p.x - q.x);
    let maybe_wrap = |a: f64| if wrap { wrap_angle(a) } else { a };
    out.push(PathParams {
        toa: p.dist(&q) / c,
        aod: maybe_wrap(los_dir),
        aoa: maybe_wrap(std::f64::consts::PI + los_dir - scene.orientation),
    });

    for s in &scene.scatterers {
        let dep = (s.y - q.y).atan2(s.x - q.x);
        let arr = (p.y - s.y).atan2(p.x - s.x);
        out.push(PathParams {
            toa: (q.dist(s) + p.dist(s)) / c,
            aod: maybe_wrap(dep),
            aoa: maybe_wrap(std::f64::consts::PI + arr - scene.orientation),
        });
    }
    out
}

/// Map a scene to per-path channel parameters (gains excluded).
///
/// Index 0 is LOS; NLOS paths follow in scatterer order. By the triangle
/// inequality the LOS delay is strictly the smallest for non-degenerate
/// scenes.
pub fn forward_map(scene: &SceneConfig, c: f64) -> Result<Vec<PathParams>> {
    scene.validate()?;
    Ok(path_params(scene, c, true))
}

/// Same map without the final (−π, π] wrap; used where the caller
/// differentiates through the composition and a branch jump would corrupt
/// finite differences.
pub(crate) fn forward_map_raw(scene: &SceneConfig, c: f64) -> Result<Vec<PathParams>> {
    scene.validate()?;
    Ok(path_params(scene, c, false))
}

/// Invert the LOS path parameters to (target position, orientation).
pub fn los_invert(los: &PathParams, bs: Point2D, c: f64) -> (Point2D, f64) {
    let range = c * los.toa;
    let p = Point2D::new(bs.x + range * los.aod.cos(), bs.y + range * los.aod.sin());
    let orientation = wrap_angle(std::f64::consts::PI + los.aod - los.aoa);
    (p, orientation)
}

/// Intersect the BS-departure ray with the target-arrival ray to recover a
/// scatterer position, given target position and orientation estimates.
pub fn scatterer_invert(
    path: &PathParams,
    target: Point2D,
    orientation: f64,
    bs: Point2D,
) -> Result<Point2D> {
    let t_dep = path.aod.tan();
    let t_arr = (path.aoa + orientation).tan();
    let denom = t_dep - t_arr;
    if !denom.is_finite() {
        return Err(Error::DegenerateGeometry(
            "vertical ray in scatterer inversion".into(),
        ));
    }
    if denom.abs() < DEGENERACY_TOL {
        return Err(Error::NearParallelRays { denominator: denom });
    }
    let x = (t_dep * bs.x - t_arr * target.x + target.y - bs.y) / denom;
    let y = t_dep * (x - bs.x) + bs.y;
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::NonFinite("scatterer inversion"));
    }
    Ok(Point2D::new(x, y))
}

/// Minimum wrapped separation of one frequency set together with its
/// resolvability threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeparationCheck {
    /// min over pairs of min(|κi−κj|, 1−|κi−κj|); +∞ for a single path.
    pub min_separation: f64,
    pub threshold: f64,
    pub passes: bool,
}

fn check(freqs: &[f64], threshold: f64) -> SeparationCheck {
    let mut min_sep = f64::INFINITY;
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            min_sep = min_sep.min(circ_dist(freqs[i], freqs[j]));
        }
    }
    SeparationCheck {
        min_separation: min_sep,
        threshold,
        passes: min_sep >= threshold,
    }
}

/// Separation report for the delay, departure, and arrival frequency sets.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub toa: SeparationCheck,
    pub aod: SeparationCheck,
    pub aoa: SeparationCheck,
}

impl SeparationReport {
    pub fn all_pass(&self) -> bool {
        self.toa.passes && self.aod.passes && self.aoa.passes
    }
}

fn floor_threshold(n: usize, div: usize) -> f64 {
    let f = (n - 1) / div;
    if f == 0 {
        f64::INFINITY
    } else {
        1.0 / f as f64
    }
}

/// Wrapped minimum separations of the three per-path frequency sets against
/// their resolvability thresholds. Advisory: the pipeline runs regardless.
pub fn min_separations(paths: &[PathParams], sys: &SystemConfig) -> SeparationReport {
    let lam = sys.wavelength();
    let toa_f: Vec<f64> = paths
        .iter()
        .map(|p| p.toa / (sys.n_sub as f64 * sys.sample_period()))
        .collect();
    let aod_f: Vec<f64> = paths
        .iter()
        .map(|p| sys.antenna_spacing * p.aod.sin() / lam)
        .collect();
    let aoa_f: Vec<f64> = paths
        .iter()
        .map(|p| sys.antenna_spacing * p.aoa.sin() / lam)
        .collect();
    SeparationReport {
        toa: check(&toa_f, floor_threshold(sys.n_sub, 8)),
        aod: check(&aod_f, floor_threshold(sys.n_tx, 4)),
        aoa: check(&aoa_f, floor_threshold(sys.n_rx, 4)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SystemConfig;
    use approx::assert_abs_diff_eq;

    pub(crate) fn paper_scene() -> SceneConfig {
        SceneConfig {
            bs: Point2D::new(0.0, 0.0),
            target: Point2D::new(20.0, 5.0),
            orientation: 0.2,
            scatterers: vec![Point2D::new(7.45, 8.54), Point2D::new(19.89, -6.05)],
        }
    }

    const C: f64 = 3e8;

    #[test]
    fn paper_scene_los_values() {
        let paths = forward_map(&paper_scene(), C).unwrap();
        assert_abs_diff_eq!(paths[0].toa, 68.718427e-9, epsilon = 1e-12);
        assert_abs_diff_eq!(paths[0].aod, 0.2449786631, epsilon = 1e-9);
        // π + aod − θo = 3.18657… wraps into (−π, π].
        assert_abs_diff_eq!(
            paths[0].aoa,
            3.186571316716657 - std::f64::consts::TAU,
            epsilon = 1e-12
        );
    }

    #[test]
    fn paper_scene_nlos_values() {
        let paths = forward_map(&paper_scene(), C).unwrap();
        // Independent evaluation: (√(7.45²+8.54²) + √(12.55²+3.54²))/c and
        // atan2(8.54, 7.45).
        assert_abs_diff_eq!(paths[1].toa, 81.24196457e-9, epsilon = 1e-14);
        assert_abs_diff_eq!(paths[1].aod, 0.8534604739820335, epsilon = 1e-12);
        assert_abs_diff_eq!(paths[2].toa, 106.13439674e-9, epsilon = 1e-14);
    }

    #[test]
    fn on_axis_scene() {
        let scene = SceneConfig {
            bs: Point2D::new(0.0, 0.0),
            target: Point2D::new(1.0, 0.0),
            orientation: 0.0,
            scatterers: vec![],
        };
        let paths = forward_map(&scene, C).unwrap();
        assert_eq!(paths.len(), 1);
        assert_abs_diff_eq!(paths[0].toa, 1.0 / C, epsilon = 1e-20);
        assert_abs_diff_eq!(paths[0].aod, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(paths[0].aoa, std::f64::consts::PI, epsilon = 1e-15);
    }

    #[test]
    fn coincident_points_error() {
        let mut scene = paper_scene();
        scene.scatterers[0] = scene.target;
        assert!(matches!(
            forward_map(&scene, C),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn los_roundtrip_exact() {
        let scene = paper_scene();
        let paths = forward_map(&scene, C).unwrap();
        let (p, th) = los_invert(&paths[0], scene.bs, C);
        assert_abs_diff_eq!(p.x, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(th, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn los_invert_trivial_axis() {
        let los = PathParams {
            toa: 1.0 / C,
            aod: 0.0,
            aoa: std::f64::consts::PI,
        };
        let (p, th) = los_invert(&los, Point2D::new(0.0, 0.0), C);
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(th, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn los_delay_perturbation_moves_along_ray() {
        let scene = paper_scene();
        let paths = forward_map(&scene, C).unwrap();
        let mut bumped = paths[0];
        bumped.toa += 1e-9;
        let (p, _) = los_invert(&bumped, scene.bs, C);
        let moved = p.dist(&scene.target);
        assert_abs_diff_eq!(moved, 0.3, epsilon = 1e-9);
        // The displacement is along the LOS direction.
        let dir = (p.y - scene.target.y).atan2(p.x - scene.target.x);
        assert_abs_diff_eq!(dir, paths[0].aod, epsilon = 1e-9);
    }

    #[test]
    fn scatterer_roundtrip_paper_scene() {
        let scene = paper_scene();
        let paths = forward_map(&scene, C).unwrap();
        for (k, s) in scene.scatterers.iter().enumerate() {
            let est = scatterer_invert(&paths[k + 1], scene.target, scene.orientation, scene.bs)
                .unwrap();
            assert_abs_diff_eq!(est.x, s.x, epsilon = 1e-9);
            assert_abs_diff_eq!(est.y, s.y, epsilon = 1e-9);
        }
    }

    #[test]
    fn parallel_rays_rejected() {
        // Arrival ray built to have the same tangent as the departure ray.
        let target = Point2D::new(10.0, 0.0);
        let path = PathParams {
            toa: 50e-9,
            aod: 0.3,
            aoa: 0.3,
        };
        let err = scatterer_invert(&path, target, 0.0, Point2D::new(0.0, 0.0));
        assert!(matches!(err, Err(Error::NearParallelRays { .. })));
    }

    fn paper_sys() -> SystemConfig {
        SystemConfig::paper_defaults()
    }

    #[test]
    fn single_path_separations_pass() {
        let paths = vec![PathParams {
            toa: 50e-9,
            aod: 0.1,
            aoa: 0.2,
        }];
        let rep = min_separations(&paths, &paper_sys());
        assert!(rep.toa.min_separation.is_infinite());
        assert!(rep.all_pass());
    }

    #[test]
    fn equal_aoa_fails() {
        let paths = vec![
            PathParams {
                toa: 50e-9,
                aod: 0.1,
                aoa: 0.2,
            },
            PathParams {
                toa: 90e-9,
                aod: 0.5,
                aoa: 0.2,
            },
        ];
        let rep = min_separations(&paths, &paper_sys());
        assert_eq!(rep.aoa.min_separation, 0.0);
        assert!(!rep.aoa.passes);
    }

    #[test]
    fn paper_scene_separation_values() {
        let sys = paper_sys();
        let paths = forward_map(&paper_scene(), C).unwrap();
        let rep = min_separations(&paths, &sys);

        // Independent exhaustive scan over wrapped pairwise distances.
        let nts = sys.n_sub as f64 * sys.sample_period();
        let freqs: Vec<f64> = paths.iter().map(|p| p.toa / nts).collect();
        let mut expect = f64::INFINITY;
        for i in 0..freqs.len() {
            for j in (i + 1)..freqs.len() {
                let d = (freqs[i] - freqs[j]).abs();
                expect = expect.min(d.min(1.0 - d));
            }
        }
        assert_abs_diff_eq!(rep.toa.min_separation, expect, epsilon = 1e-15);
        // At N = 15 the delay threshold is 1/⌊14/8⌋ = 1: unattainable, so the
        // paper's own scene fails this advisory check.
        assert_eq!(rep.toa.threshold, 1.0);
        assert!(!rep.toa.passes);
        assert!((rep.aoa.threshold - 1.0 / 3.0).abs() < 1e-15);
    }
}
