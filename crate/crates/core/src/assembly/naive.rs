//! Entry-by-entry assembly. Every pair integral is evaluated from scratch for
//! every matrix entry it contributes to, which costs O(L^6) operations for
//! `p = n = L` on a geometric mesh. Used as an oracle for the blockwise path
//! and as the reference point of the complexity comparison.

use rayon::prelude::*;

use super::{
    q_adjacent_counted, q_complement_counted, q_identical_counted, q_separated_counted, OpCounter, PairLocal,
};
use crate::error::Result;
use crate::mesh::{pair_class, PairClass, Partner, Space};
use crate::special::{kernel_constant, FracParams};

/// Returns the upper triangle (row-major, full storage) of the matrix.
pub(super) fn assemble(
    space: &Space,
    params: FracParams,
    n: usize,
    parallel: bool,
    counter: &mut OpCounter,
) -> Result<Vec<f64>> {
    let dim = space.dim();
    let m = space.mesh().num_elements();
    let restrictions: Vec<Vec<Vec<f64>>> =
        (0..dim).map(|i| (0..m).map(|k| space.restriction(i, k)).collect()).collect();
    let supports: Vec<Vec<usize>> = (0..dim).map(|i| space.support(i)).collect();
    let scale = kernel_constant(params) / 2.0;

    let row = |i: usize| -> Result<(Vec<f64>, OpCounter)> {
        let mut local = OpCounter::default();
        let mut values = vec![0.0; dim - i];
        for j in i..dim {
            let (si, sj) = (&supports[i], &supports[j]);
            let (ri, rj) = (&restrictions[i], &restrictions[j]);
            let mut total = 0.0;
            for ta in space.mesh().elements() {
                for tb in space.mesh().elements() {
                    let touches = |s: &[usize]| s.contains(&ta.index) || s.contains(&tb.index);
                    if !touches(si) || !touches(sj) {
                        continue;
                    }
                    let v = PairLocal::new(&rj[ta.index], &rj[tb.index]);
                    let w = PairLocal::new(&ri[ta.index], &ri[tb.index]);
                    total += match pair_class(&ta, &Partner::Element(tb)) {
                        PairClass::Identical => q_identical_counted(&ta, v.first, w.first, n, params, &mut local)?,
                        PairClass::AdjacentLeftRight | PairClass::AdjacentRightLeft => {
                            q_adjacent_counted(&ta, &tb, v, w, n, params, &mut local)?
                        }
                        PairClass::Separated => q_separated_counted(&ta, &tb, v, w, n, params, &mut local)?,
                        PairClass::Complement => unreachable!("element partner"),
                    };
                }
            }
            for &k in si.iter().filter(|k| sj.contains(k)) {
                let t = space.mesh().element(k);
                total += 2.0 * q_complement_counted(&t, &rj[k], &ri[k], n, params, &mut local)?;
            }
            values[j - i] = scale * total;
        }
        Ok((values, local))
    };

    let rows: Vec<Result<(Vec<f64>, OpCounter)>> =
        if parallel { (0..dim).into_par_iter().map(row).collect() } else { (0..dim).map(row).collect() };

    let mut entries = vec![0.0; dim * dim];
    for (i, r) in rows.into_iter().enumerate() {
        let (values, local) = r?;
        entries[i * dim + i..(i + 1) * dim].copy_from_slice(&values);
        *counter += local;
    }
    Ok(entries)
}
