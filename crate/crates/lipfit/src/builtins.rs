//! Named builtin data mirroring the worked examples, so golden runs need no
//! external files.
//!
//! * case 1 — plateau datum k·χ₍₋ᵣ,ᵣ₎ on (−1, 1)
//! * case 2 — steep vee 2|x| on (−1, 1)
//! * case 3 — square root √|x| on (−1, 1)
//! * radial — plateau k·χ_{B_r} on the unit disk

use std::sync::Arc;

use lipfit_core::grid::{Grid, GridError, MaskSpec, ScalarField, StencilKind};

/// A named builtin datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Case1 { k: f64, r: f64 },
    Case2,
    Case3,
    Radial { k: f64, r: f64 },
}

impl Builtin {
    /// Grid + sampled datum at the requested resolution (nodes per axis).
    pub fn build(self, n: usize) -> Result<(Arc<Grid>, ScalarField), GridError> {
        match self {
            Builtin::Case1 { k, r } => {
                let grid = Grid::line(-1.0, 1.0, n)?;
                let f =
                    ScalarField::from_fn_1d(&grid, |x| if x.abs() < r { k } else { 0.0 })?;
                Ok((grid, f))
            }
            Builtin::Case2 => {
                let grid = Grid::line(-1.0, 1.0, n)?;
                let f = ScalarField::from_fn_1d(&grid, |x| 2.0 * x.abs())?;
                Ok((grid, f))
            }
            Builtin::Case3 => {
                let grid = Grid::line(-1.0, 1.0, n)?;
                let f = ScalarField::from_fn_1d(&grid, |x| x.abs().sqrt())?;
                Ok((grid, f))
            }
            Builtin::Radial { k, r } => {
                let grid = Grid::build(
                    2,
                    &[[-1.0, 1.0], [-1.0, 1.0]],
                    &[n, n],
                    &MaskSpec::Disk { center: [0.0, 0.0], radius: 1.0 },
                    StencilKind::Eight,
                )?;
                let f = ScalarField::from_fn(&grid, move |[x, y]| {
                    if x.hypot(y) < r {
                        k
                    } else {
                        0.0
                    }
                })?;
                Ok((grid, f))
            }
        }
    }

    pub fn is_radial(self) -> bool {
        matches!(self, Builtin::Radial { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_sample_their_rules() {
        let (g, f) = Builtin::Case2.build(5).unwrap();
        assert_eq!(f.values(), &[2.0, 1.0, 0.0, 1.0, 2.0]);
        assert_eq!(g.num_nodes(), 5);

        let (_, f1) = Builtin::Case1 { k: 1.0, r: 0.4 }.build(2001).unwrap();
        assert_eq!(f1.values()[1000], 1.0); // x = 0
        assert_eq!(f1.values()[1400], 0.0); // x = 0.4, open interval

        let (g3, f3) = Builtin::Case3.build(4001).unwrap();
        let i = (4.0 / 9.0 / g3.spacing(0) + 2000.0).round() as usize;
        assert!((f3.values()[i] - (g3.coords(i)[0].abs()).sqrt()).abs() < 1e-15);

        let (gr, fr) = Builtin::Radial { k: 1.0, r: 0.4 }.build(41).unwrap();
        assert!(gr.num_nodes() < 41 * 41, "disk mask removes corners");
        let center = (0..gr.num_nodes())
            .find(|&v| {
                let [x, y] = gr.coords(v);
                x == 0.0 && y == 0.0
            })
            .unwrap();
        assert_eq!(fr.values()[center], 1.0);
    }
}
