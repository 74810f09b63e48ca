use super::lu::Lu;
use super::standard::StandardForm;
use super::{LpError, Relation, Settings};

pub(super) enum RawOutcome {
    Optimal {
        x_std: Vec<f64>,
        y_std: Vec<f64>,
        iterations: usize,
    },
    Infeasible {
        iterations: usize,
    },
    Unbounded {
        iterations: usize,
    },
}

/// Power of two closest to `1 / max_abs`; exact to apply and to undo.
fn pow2_recip(max_abs: f64) -> f64 {
    if max_abs > 0.0 && max_abs.is_finite() {
        (-max_abs.log2().round()).exp2()
    } else {
        1.0
    }
}

struct Tableau {
    m: usize,
    /// total columns, rhs stored at index `n_total`
    n_total: usize,
    w: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    pivot_row: Vec<f64>,
    nonzeros: Vec<usize>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.w + self.n_total]
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.d.copy_from_slice(costs);
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.w..i * self.w + self.n_total];
            for (dj, &tij) in self.d.iter_mut().zip(row) {
                *dj -= cb * tij;
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, e: usize, feas_tol: f64) {
        let w = self.w;
        let inv = 1.0 / self.t[r * w + e];
        self.pivot_row.clear();
        self.nonzeros.clear();
        for j in 0..w {
            let v = self.t[r * w + j] * inv;
            self.t[r * w + j] = v;
            self.pivot_row.push(v);
            if v != 0.0 {
                self.nonzeros.push(j);
            }
        }
        self.t[r * w + e] = 1.0;
        self.pivot_row[e] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + e];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for &j in &self.nonzeros {
                row[j] -= f * self.pivot_row[j];
            }
            row[e] = 0.0;
            let rhs = &mut row[self.n_total];
            if *rhs < 0.0 && *rhs > -feas_tol {
                *rhs = 0.0;
            }
        }
        let f = self.d[e];
        if f != 0.0 {
            for &j in &self.nonzeros {
                if j < self.n_total {
                    self.d[j] -= f * self.pivot_row[j];
                }
            }
            self.d[e] = 0.0;
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = e;
        self.is_basic[e] = true;
    }

    /// Bland-rule primal simplex. Returns `false` on an unbounded ray.
    fn optimize(
        &mut self,
        allowed: &[bool],
        s: &Settings,
        iterations: &mut usize,
    ) -> Result<bool, LpError> {
        loop {
            let entering = (0..self.n_total)
                .find(|&j| allowed[j] && !self.is_basic[j] && self.d[j] < -s.optimality_tol);
            let Some(e) = entering else {
                return Ok(true);
            };
            if *iterations >= s.max_iterations {
                return Err(LpError::IterationLimit(s.max_iterations));
            }
            let mut min_ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.t[i * self.w + e];
                if a > s.pivot_tol {
                    min_ratio = min_ratio.min(self.rhs(i).max(0.0) / a);
                }
            }
            if min_ratio == f64::INFINITY {
                return Ok(false);
            }
            let tie = min_ratio + 1e-12 * (1.0 + min_ratio);
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                let a = self.t[i * self.w + e];
                if a > s.pivot_tol && self.rhs(i).max(0.0) / a <= tie {
                    match leave {
                        Some(l) if self.basis[l] <= self.basis[i] => {}
                        _ => leave = Some(i),
                    }
                }
            }
            let r = leave.expect("ratio test found a finite minimum");
            self.pivot(r, e, s.feasibility_tol);
            *iterations += 1;
        }
    }
}

pub(super) fn run(sf: &StandardForm, s: &Settings) -> Result<RawOutcome, LpError> {
    let (m, n) = (sf.rows, sf.cols);

    let mut row_scale = vec![1.0; m];
    for (i, rs) in row_scale.iter_mut().enumerate() {
        let mx = sf.a[i * n..(i + 1) * n]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        *rs = pow2_recip(mx);
    }
    let mut col_scale = vec![1.0; n];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let mx = (0..m).fold(0.0f64, |acc, i| {
            acc.max((sf.a[i * n + j] * row_scale[i]).abs())
        });
        *cs = pow2_recip(mx);
    }
    let obj_scale = pow2_recip(
        sf.c.iter()
            .zip(&col_scale)
            .fold(0.0f64, |acc, (c, cs)| acc.max((c * cs).abs())),
    );

    // orient rows so that rhs >= 0, and turn `>= 0` rows into `<= 0` rows
    let mut orient = vec![1.0; m];
    let mut rel = sf.rel.clone();
    for i in 0..m {
        let b = sf.b[i] * row_scale[i];
        let flip = b < 0.0 || (b == 0.0 && rel[i] == Relation::Ge);
        if flip {
            orient[i] = -1.0;
            rel[i] = match rel[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let n_logical = rel.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
    let art_start = n + n_logical;
    let n_total = art_start + n_art;
    let w = n_total + 1;

    let mut t = vec![0.0; m * w];
    let mut basis = vec![0usize; m];
    let mut next_logical = n;
    let mut next_art = art_start;
    let mut bmax: f64 = 0.0;
    for i in 0..m {
        let f = orient[i] * row_scale[i];
        let row = &mut t[i * w..(i + 1) * w];
        for j in 0..n {
            let a = sf.a[i * n + j];
            if a != 0.0 {
                row[j] = f * a * col_scale[j];
            }
        }
        row[n_total] = f * sf.b[i];
        bmax = bmax.max(row[n_total]);
        match rel[i] {
            Relation::Le => {
                row[next_logical] = 1.0;
                basis[i] = next_logical;
                next_logical += 1;
            }
            Relation::Ge => {
                row[next_logical] = -1.0;
                next_logical += 1;
                row[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let initial = t.clone();

    let mut is_basic = vec![false; n_total];
    for &bcol in &basis {
        is_basic[bcol] = true;
    }
    let mut tab = Tableau {
        m,
        n_total,
        w,
        t,
        d: vec![0.0; n_total],
        basis,
        is_basic,
        pivot_row: Vec::with_capacity(w),
        nonzeros: Vec::with_capacity(w),
    };
    let mut iterations = 0usize;

    if n_art > 0 {
        let mut phase1 = vec![0.0; n_total];
        phase1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        tab.set_costs(&phase1);
        let allowed = vec![true; n_total];
        tab.optimize(&allowed, s, &mut iterations)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.rhs(i).max(0.0))
            .sum();
        if infeasibility > s.feasibility_tol * (1.0 + bmax) {
            return Ok(RawOutcome::Infeasible { iterations });
        }
        // drive zero-level artificials out of the basis where a pivot exists
        for i in 0..m {
            if tab.basis[i] < art_start {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..art_start {
                let a = tab.t[i * w + j].abs();
                if !tab.is_basic[j] && a > s.pivot_tol && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                tab.pivot(i, j, s.feasibility_tol);
                iterations += 1;
            }
        }
    }

    let mut phase2 = vec![0.0; n_total];
    for j in 0..n {
        phase2[j] = sf.c[j] * col_scale[j] * obj_scale;
    }
    tab.set_costs(&phase2);
    let mut allowed = vec![true; n_total];
    allowed[art_start..].iter_mut().for_each(|a| *a = false);
    if !tab.optimize(&allowed, s, &mut iterations)? {
        return Ok(RawOutcome::Unbounded { iterations });
    }

    // re-solve the optimal basis from the untouched scaled data
    let mut bmat = vec![0.0; m * m];
    for (k, &col) in tab.basis.iter().enumerate() {
        for i in 0..m {
            bmat[i * m + k] = initial[i * w + col];
        }
    }
    let b0: Vec<f64> = (0..m).map(|i| initial[i * w + n_total]).collect();
    let lu = Lu::factor(bmat, m, 1e-14).ok_or_else(|| {
        LpError::NumericalBreakdown("optimal basis matrix is numerically singular".into())
    })?;
    let xb = lu.solve(&b0);
    let cb: Vec<f64> = tab.basis.iter().map(|&col| phase2[col]).collect();
    let y = lu.solve_transpose(&cb);

    let mut x_std = vec![0.0; n];
    let neg_tol = 1e-7 * (1.0 + bmax);
    for (k, &col) in tab.basis.iter().enumerate() {
        let mut v = xb[k];
        if v < 0.0 {
            if v < -neg_tol {
                return Err(LpError::NumericalBreakdown(format!(
                    "basic variable re-solved to {v:e}"
                )));
            }
            v = 0.0;
        }
        if col < n {
            x_std[col] = v * col_scale[col];
        }
    }
    let y_std = (0..m)
        .map(|i| orient[i] * row_scale[i] * y[i] / obj_scale)
        .collect();
    Ok(RawOutcome::Optimal {
        x_std,
        y_std,
        iterations,
    })
}
