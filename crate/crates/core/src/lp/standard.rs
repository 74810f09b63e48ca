use super::{LinearProgram, Relation, Sense};

/// How an original variable is expressed through non-negative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + col`
    Shift { col: usize, offset: f64 },
    /// `x = offset - col`
    Reflect { col: usize, offset: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

/// `min c.x + obj_offset  s.t.  A x (rel) b,  x >= 0`, minimization form.
///
/// The first `original_rows` rows mirror the caller's constraints; the rest
/// encode finite upper bounds.
#[derive(Debug, Clone)]
pub(super) struct StandardForm {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub rel: Vec<Relation>,
    pub c: Vec<f64>,
    pub obj_offset: f64,
    pub original_rows: usize,
    maps: Vec<VarMap>,
}

impl StandardForm {
    pub fn build(lp: &LinearProgram) -> Self {
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut cols = 0usize;
        // (std column, width) of finite ranges that need an upper-bound row
        let mut range_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..lp.num_vars() {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            if lo.is_finite() {
                maps.push(VarMap::Shift {
                    col: cols,
                    offset: lo,
                });
                if hi.is_finite() {
                    range_rows.push((cols, hi - lo));
                }
                cols += 1;
            } else if hi.is_finite() {
                maps.push(VarMap::Reflect {
                    col: cols,
                    offset: hi,
                });
                cols += 1;
            } else {
                maps.push(VarMap::Split {
                    pos: cols,
                    neg: cols + 1,
                });
                cols += 2;
            }
        }

        let original_rows = lp.constraints.len();
        let rows = original_rows + range_rows.len();
        let mut a = vec![0.0; rows * cols];
        let mut b = Vec::with_capacity(rows);
        let mut rel = Vec::with_capacity(rows);
        for (k, row) in lp.constraints.iter().enumerate() {
            let mut rhs = row.rhs;
            let dst = &mut a[k * cols..(k + 1) * cols];
            for (j, &coef) in row.coeffs.iter().enumerate() {
                if coef == 0.0 {
                    continue;
                }
                match maps[j] {
                    VarMap::Shift { col, offset } => {
                        dst[col] += coef;
                        rhs -= coef * offset;
                    }
                    VarMap::Reflect { col, offset } => {
                        dst[col] -= coef;
                        rhs -= coef * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        dst[pos] += coef;
                        dst[neg] -= coef;
                    }
                }
            }
            b.push(rhs);
            rel.push(row.relation);
        }
        for (idx, &(col, width)) in range_rows.iter().enumerate() {
            a[(original_rows + idx) * cols + col] = 1.0;
            b.push(width);
            rel.push(Relation::Le);
        }

        let mut c = vec![0.0; cols];
        let mut obj_offset = 0.0;
        for (j, &cj) in lp.objective.iter().enumerate() {
            let cj = sign * cj;
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    c[col] += cj;
                    obj_offset += cj * offset;
                }
                VarMap::Reflect { col, offset } => {
                    c[col] -= cj;
                    obj_offset += cj * offset;
                }
                VarMap::Split { pos, neg } => {
                    c[pos] += cj;
                    c[neg] -= cj;
                }
            }
        }

        Self {
            rows,
            cols,
            a,
            b,
            rel,
            c,
            obj_offset,
            original_rows,
            maps,
        }
    }

    /// Maps a standard-form point back to the caller's variables.
    pub fn recover(&self, x_std: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, offset } => offset + x_std[col],
                VarMap::Reflect { col, offset } => offset - x_std[col],
                VarMap::Split { pos, neg } => x_std[pos] - x_std[neg],
            })
            .collect()
    }
}
