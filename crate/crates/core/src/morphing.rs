//! Analytic slider morph and finite-difference coordinate sensitivities.

use thiserror::Error;

use crate::discretization::{DiscretizationError, Mesh};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorphError {
    #[error("mesh has no structured slider grid to morph")]
    NotMorphable,
    #[error("expected {expected} shape parameters, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("shape parameter {index} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("morph inverted the mesh: {0}")]
    Inverted(DiscretizationError),
}

/// One parameter moves top and bottom together; two parameters move them
/// independently and rescale the thickness to keep the slider area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeMode {
    OneParam,
    TwoParam,
}

impl ShapeMode {
    pub fn num_params(self) -> usize {
        match self {
            ShapeMode::OneParam => 1,
            ShapeMode::TwoParam => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeParams {
    pub mode: ShapeMode,
    pub bounds: Vec<(f64, f64)>,
}

impl ShapeParams {
    pub fn new(mode: ShapeMode, lo: f64, hi: f64) -> Self {
        ShapeParams {
            mode,
            bounds: vec![(lo, hi); mode.num_params()],
        }
    }

    pub fn check(&self, p: &[f64]) -> Result<(), MorphError> {
        if p.len() != self.mode.num_params() {
            return Err(MorphError::WrongCount {
                expected: self.mode.num_params(),
                got: p.len(),
            });
        }
        for (index, (&value, &(lo, hi))) in p.iter().zip(&self.bounds).enumerate() {
            if !(value >= lo && value <= hi) {
                return Err(MorphError::OutOfBounds {
                    index,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// Parabolic profile `1 - (2t - 1)^2` on the full slider; the half-slider
/// covers `t` in `[0, 1/2]` and peaks at the symmetry plane.
fn profile(t: f64) -> f64 {
    1.0 - (2.0 * t - 1.0).powi(2)
}

fn trapezoid(xs: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    xs.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
        .sum()
}

/// New mesh for shape parameters `p`, always computed from `base`.
pub fn morph(base: &Mesh, shape: &ShapeParams, p: &[f64]) -> Result<Mesh, MorphError> {
    shape.check(p)?;
    morph_unchecked(base, shape.mode, p)
}

fn morph_unchecked(base: &Mesh, mode: ShapeMode, p: &[f64]) -> Result<Mesh, MorphError> {
    let g = base.grid().ok_or(MorphError::NotMorphable)?;
    if p.iter().all(|&v| v == 0.0) {
        return Ok(base.clone());
    }
    let (dt, db) = match mode {
        ShapeMode::OneParam => (p[0], p[0]),
        ShapeMode::TwoParam => (p[0], p[1]),
    };
    let cols: Vec<usize> = g.slider_columns.clone().collect();
    let base_coords = base.coords();
    let xs: Vec<f64> = cols.iter().map(|&i| base_coords[g.node(i, 0)][0]).collect();
    let phi: Vec<f64> = xs.iter().map(|&x| profile(g.slider_t(x))).collect();
    let top: Vec<f64> = phi.iter().map(|f| g.height + dt * f).collect();
    let bottom: Vec<f64> = phi.iter().map(|f| db * f).collect();
    // Thickness h (1 + s phi) keeps the ends fixed; the area is linear in s.
    let h: Vec<f64> = top.iter().zip(&bottom).map(|(t, b)| t - b).collect();
    let base_area = g.height * (xs[xs.len() - 1] - xs[0]).abs();
    let a0 = trapezoid(&xs, |i| h[i]);
    let a1 = trapezoid(&xs, |i| h[i] * phi[i]);
    let s = if a1 == 0.0 {
        0.0
    } else {
        (base_area - a0) / a1
    };

    let mut coords = base_coords.to_vec();
    for (c, &i) in cols.iter().enumerate() {
        let mid = 0.5 * (top[c] + bottom[c]);
        let half = 0.5 * h[c] * (1.0 + s * phi[c]);
        let (lo, hi) = (mid - half, mid + half);
        for j in 0..=g.ny {
            let n = g.node(i, j);
            let eta = base_coords[n][1] / g.height;
            coords[n][1] = lo + eta * (hi - lo);
        }
    }
    base.with_coords(coords).map_err(MorphError::Inverted)
}

/// Central-difference coordinate sensitivities, one column of length
/// `2 * num_nodes` per parameter (x and y interleaved by node).
pub fn mesh_sensitivity(
    base: &Mesh,
    shape: &ShapeParams,
    p: &[f64],
) -> Result<Vec<Vec<f64>>, MorphError> {
    shape.check(p)?;
    let mut cols = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let h = 1e-6 * (1.0 + p[k].abs());
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[k] += h;
        pm[k] -= h;
        let mp = morph_unchecked(base, shape.mode, &pp)?;
        let mm = morph_unchecked(base, shape.mode, &pm)?;
        let col = mp
            .coords()
            .iter()
            .zip(mm.coords())
            .flat_map(|(a, b)| [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)])
            .collect();
        cols.push(col);
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{shoelace, Region, SliderGeometry};

    fn base() -> Mesh {
        Mesh::slider(&SliderGeometry::default()).unwrap()
    }

    fn slider_area(m: &Mesh) -> f64 {
        m.region_area(Region::Slider)
    }

    #[test]
    fn zero_is_identity() {
        let b = base();
        for mode in [ShapeMode::OneParam, ShapeMode::TwoParam] {
            let sp = ShapeParams::new(mode, -0.3, 0.3);
            let m = morph(&b, &sp, &vec![0.0; mode.num_params()]).unwrap();
            assert_eq!(m.coords(), b.coords());
        }
    }

    #[test]
    fn one_param_midpoint_and_ends() {
        let b = base();
        let g = b.grid().unwrap().clone();
        let d = 0.07;
        let m = morph(&b, &ShapeParams::new(ShapeMode::OneParam, -0.3, 0.3), &[d]).unwrap();
        for j in [0, g.ny] {
            let mid = g.node(*g.slider_columns.start(), j);
            let end = g.node(*g.slider_columns.end(), j);
            assert!((m.coords()[mid][1] - b.coords()[mid][1] - d).abs() < 1e-15);
            assert_eq!(m.coords()[end], b.coords()[end]);
        }
    }

    #[test]
    fn non_slider_nodes_fixed() {
        let b = base();
        let g = b.grid().unwrap().clone();
        let m = morph(
            &b,
            &ShapeParams::new(ShapeMode::TwoParam, -0.3, 0.3),
            &[0.1, -0.05],
        )
        .unwrap();
        for j in 0..=g.ny {
            for i in *g.slider_columns.end()..=g.nx {
                assert_eq!(m.coords()[g.node(i, j)], b.coords()[g.node(i, j)]);
            }
        }
        assert_eq!(m.elements(), b.elements());
    }

    #[test]
    fn two_param_conserves_area() {
        let b = base();
        let sp = ShapeParams::new(ShapeMode::TwoParam, -0.3, 0.3);
        for p in [[0.1, -0.05], [0.2, 0.0], [-0.1, 0.15]] {
            let m = morph(&b, &sp, &p).unwrap();
            // independent oracle: the outline polygon of the slider
            let g = m.grid().unwrap();
            let mut outline = Vec::new();
            for i in g.slider_columns.clone() {
                outline.push(m.coords()[g.node(i, 0)]);
            }
            for i in g.slider_columns.clone().rev() {
                outline.push(m.coords()[g.node(i, g.ny)]);
            }
            let a = shoelace(&outline);
            assert!((a - 0.5).abs() < 1e-10, "{a}");
            assert!((slider_area(&m) - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn sensitivity_matches_analytic() {
        let b = base();
        let g = b.grid().unwrap().clone();
        let sp = ShapeParams::new(ShapeMode::OneParam, -0.3, 0.3);
        let xp = mesh_sensitivity(&b, &sp, &[0.0]).unwrap();
        let top_mid = g.node(0, g.ny);
        assert!((xp[0][2 * top_mid + 1] - 1.0).abs() < 1e-10);
        for n in 0..b.num_nodes() {
            let i = n % (g.nx + 1);
            let x = b.coords()[n][0];
            let want = if g.slider_columns.contains(&i) {
                profile(g.slider_t(x))
            } else {
                0.0
            };
            assert_eq!(xp[0][2 * n], 0.0);
            assert!((xp[0][2 * n + 1] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn bounds_and_inversion() {
        let b = base();
        let sp = ShapeParams::new(ShapeMode::OneParam, -0.1, 0.1);
        assert!(matches!(
            morph(&b, &sp, &[0.2]),
            Err(MorphError::OutOfBounds { .. })
        ));
        let wide = ShapeParams::new(ShapeMode::TwoParam, -5.0, 5.0);
        assert!(matches!(
            morph(&b, &wide, &[-2.0, 2.0]),
            Err(MorphError::Inverted(_))
        ));
    }
}
