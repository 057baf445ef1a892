//! Convergence ladders and verification sweeps, returning plain rows; the
//! `qipp` crate turns them into CSV.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::linalg::{kernel_dimension, RANK_TOL};
use crate::mesh::{element_patch, generate_structured, jittered_delaunay_mesh, Mesh, Seed};
use crate::negproj::{build_negative_projection, negative_norm_surrogate, Variant};
use crate::polybasis::{error_exactness, project_broken, reference_basis, DiscontinuousField};
use crate::quasiinterp::{Kind, PatchPolicy, QuasiInterpolator};
use crate::solvers::{solve_hdg, solve_mixed_rt0, stenberg_postprocess};
use crate::weights::{gram_matrix, grow_vicinity};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Rate between two consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eoc {
    Rate(f64),
    /// One of the two errors is zero (at the quadrature floor).
    Saturated,
}

impl Eoc {
    pub fn value(self) -> Option<f64> {
        match self {
            Eoc::Rate(r) => Some(r),
            Eoc::Saturated => None,
        }
    }
}

/// `rate_k = log(e_{k-1} / e_k) / log(h_{k-1} / h_k)`.
pub fn compute_eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<Eoc>> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument(format!("need equal lengths >= 2, got {} and {}", errors.len(), hs.len())));
    }
    if hs.iter().any(|h| !(*h > 0.0)) || errors.iter().any(|e| *e < 0.0 || e.is_nan()) {
        return Err(Error::InvalidArgument("mesh sizes must be positive and errors nonnegative".into()));
    }
    Ok((1..errors.len())
        .map(|k| {
            if errors[k] == 0.0 || errors[k - 1] == 0.0 {
                Eoc::Saturated
            } else {
                Eoc::Rate((errors[k - 1] / errors[k]).ln() / (hs[k - 1] / hs[k]).ln())
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub nelems: usize,
    pub h: f64,
    pub errors: Vec<f64>,
    /// `None` on the first level.
    pub eocs: Vec<Option<Eoc>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub columns: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    /// Mesh constant `R` per level.
    pub mesh_constant: Vec<usize>,
    /// Largest patch order used by piecewise constant weights, per level.
    pub max_vicinity: Vec<Option<usize>>,
}

impl Study {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| String::from(*c)).collect(),
            rows: Vec::new(),
            mesh_constant: Vec::new(),
            max_vicinity: Vec::new(),
        }
    }

    fn push(&mut self, mesh: &Mesh, errors: Vec<f64>) -> Result<()> {
        let level = self.rows.len();
        let mut eocs = vec![None; errors.len()];
        if let Some(prev) = self.rows.last() {
            for (j, e) in errors.iter().enumerate() {
                eocs[j] = Some(compute_eoc(&[prev.errors[j], *e], &[prev.h, mesh.h()])?[0]);
            }
        }
        self.rows.push(ConvergenceRow { level, nelems: mesh.num_elements(), h: mesh.h(), errors, eocs });
        Ok(())
    }

    /// Rate of column `j` on the last increment.
    pub fn terminal_eoc(&self, j: usize) -> Option<f64> {
        self.rows.last()?.eocs[j]?.value()
    }

    /// Rates of column `j` on the last `k` increments.
    pub fn last_eocs(&self, j: usize, k: usize) -> Vec<Option<f64>> {
        let n = self.rows.len();
        self.rows[n.saturating_sub(k)..].iter().map(|r| r.eocs[j].and_then(Eoc::value)).collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// `n = 4, 8, 16, ...` with `levels` entries.
pub fn ladder(levels: usize) -> Vec<usize> {
    (0..levels).map(|k| 4 << k).collect()
}

/// `sin(pi x) sin(pi y)`.
pub fn smooth_solution(x: Point) -> f64 {
    (core::f64::consts::PI * x[0]).sin() * (core::f64::consts::PI * x[1]).sin()
}

/// `-div grad` of [`smooth_solution`].
pub fn smooth_load(x: Point) -> f64 {
    2.0 * core::f64::consts::PI * core::f64::consts::PI * smooth_solution(x)
}

fn require_levels(levels: usize) -> Result<()> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("a study needs at least 3 levels, got {levels}")));
    }
    Ok(())
}

/// `||u - Op(Pi u)||` with `Pi` onto the source degree of the operator.
pub fn run_interp_study(p: usize, kind: Kind, levels: usize, policy: PatchPolicy) -> Result<Study> {
    require_levels(levels)?;
    let mut study = Study::new(&["err"]);
    for n in ladder(levels) {
        let mesh = generate_structured(2, n)?;
        let qi = QuasiInterpolator::build(&mesh, p, kind, policy)?;
        let u = qi.apply_fn(&mesh, smooth_solution)?;
        let e = u.l2_distance(&mesh, smooth_solution, error_exactness(p + 1))?;
        study.push(&mesh, vec![e])?;
        study.mesh_constant.push(qi.mesh_constant());
        study.max_vicinity.push(kind.piecewise_constant().then(|| qi.max_patch_order()));
    }
    Ok(study)
}

/// Lowest-order mixed solution and its postprocessings.
pub fn run_mixed_study(levels: usize) -> Result<Study> {
    require_levels(levels)?;
    let mut study = Study::new(&["err_u", "err_stenberg", "err_j0", "err_i0", "err_pi0"]);
    for n in ladder(levels) {
        let mesh = generate_structured(2, n)?;
        let sol = solve_mixed_rt0(&mesh, smooth_load)?;
        let uh = sol.u_field(&mesh)?;
        let ex = error_exactness(2);
        let e_u = uh.l2_distance(&mesh, smooth_solution, ex)?;
        let e_st = stenberg_postprocess(&mesh, &sol)?.l2_distance(&mesh, smooth_solution, ex)?;
        let j0 = QuasiInterpolator::build(&mesh, 0, Kind::J0, PatchPolicy::Default)?;
        let e_j = j0.apply(&mesh, &uh)?.l2_distance(&mesh, smooth_solution, ex)?;
        let i0 = QuasiInterpolator::build(&mesh, 1, Kind::I0, PatchPolicy::Default)?;
        let e_i = i0.apply(&mesh, &uh)?.l2_distance(&mesh, smooth_solution, ex)?;
        let mut d = project_broken(&mesh, 0, smooth_solution)?;
        d.axpy(-1.0, &uh)?;
        let e_pi = d.l2_norm(&mesh)?;
        study.push(&mesh, vec![e_u, e_st, e_j, e_i, e_pi])?;
        study.mesh_constant.push(j0.mesh_constant());
        study.max_vicinity.push(Some(i0.max_patch_order()));
    }
    Ok(study)
}

/// HDG solution of degree `p` postprocessed with `I0` of degree `p + 1`.
pub fn run_hdg_study(p: usize, levels: usize, tau: f64, policy: PatchPolicy) -> Result<Study> {
    require_levels(levels)?;
    let mut study = Study::new(&["err_i0", "err_pi0"]);
    for n in ladder(levels) {
        let mesh = generate_structured(2, n)?;
        let sol = solve_hdg(&mesh, smooth_load, p, tau)?;
        let i0 = QuasiInterpolator::build(&mesh, p, Kind::I0, policy)?;
        let e_i = i0.apply(&mesh, &sol.u)?.l2_distance(&mesh, smooth_solution, error_exactness(p + 1))?;
        let mut d = project_broken(&mesh, 0, smooth_solution)?;
        d.axpy(-1.0, &sol.u.project(&mesh, 0)?)?;
        study.push(&mesh, vec![e_i, d.l2_norm(&mesh)?])?;
        study.mesh_constant.push(i0.mesh_constant());
        study.max_vicinity.push(Some(i0.max_patch_order()));
    }
    Ok(study)
}

/// Smooth test function for the negative-norm study.
pub fn negproj_test_function(x: Point) -> f64 {
    (core::f64::consts::PI * x[0]).cos() * x[1].exp()
}

fn random_broken(mesh: &Mesh, degree: usize, rng: &mut ChaCha8Rng) -> Result<DiscontinuousField> {
    let n = reference_basis(2, degree).len() * mesh.num_elements();
    DiscontinuousField::from_coefficients(mesh, degree, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

/// Columns: surrogate `H^-1` norm of `(1 - Q) phi` for a smooth `phi`, the
/// ratio `||Q phi|| / ||phi||` for a random broken `phi` of degree `p + 2`,
/// and `max |Q phi - phi|` over a random broken `phi` of degree `p`.
pub fn run_negproj_study(p: usize, levels: usize, variant: Variant) -> Result<Study> {
    require_levels(levels)?;
    let mut study = Study::new(&["err_hm1", "l2_ratio", "idempotency"]);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in ladder(levels) {
        let mesh = generate_structured(2, n)?;
        let q = build_negative_projection(&mesh, p, variant)?;
        let qphi = q.apply_fn(&mesh, negproj_test_function)?;
        let hm1 = negative_norm_surrogate(
            &mesh,
            |t, x| negproj_test_function(x) - qphi.evaluate(&mesh, t, x),
            2,
            error_exactness(p),
        )?;
        let phi = random_broken(&mesh, p + 2, &mut rng)?;
        let ratio = q.apply(&mesh, &phi)?.l2_norm(&mesh)? / phi.l2_norm(&mesh)?;
        let low = random_broken(&mesh, p, &mut rng)?;
        let back = q.apply(&mesh, &low)?;
        let idem = back.coefficients().iter().zip(low.coefficients()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        study.push(&mesh, vec![hm1, ratio, idem])?;
        study.mesh_constant.push(crate::mesh::AnchorTable::new(&mesh).max_order);
        study.max_vicinity.push(None);
    }
    Ok(study)
}

/// One random interior-vertex patch of the rank check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankRow {
    pub trial: usize,
    pub seed: u64,
    pub vertex: usize,
    pub valence: usize,
    pub kernel: usize,
}

/// Kernel dimension of the Gram between `P^{p+1}` and broken `P^p` on
/// `trials` interior-vertex patches of jittered Delaunay meshes.
pub fn run_rank_study(p: usize, trials: usize) -> Result<Vec<RankRow>> {
    let mut out = Vec::with_capacity(trials);
    let mut seed = 0u64;
    while out.len() < trials {
        let mesh = jittered_delaunay_mesh(5, seed)?;
        for z in mesh.interior_vertices() {
            if out.len() == trials {
                break;
            }
            let patch = element_patch(&mesh, Seed::Vertex(z), 1)?;
            let kernel = kernel_dimension(&gram_matrix(&mesh, &patch, p + 1, p), RANK_TOL);
            out.push(RankRow { trial: out.len(), seed, vertex: z, valence: patch.len(), kernel });
        }
        seed += 1;
    }
    Ok(out)
}

/// Nullspace dimension of the orthogonality constraints of degree `n` on
/// `trials` full interior-vertex patches of jittered Delaunay meshes. The
/// `kernel` field holds the dimension.
pub fn run_patch_nullspace_study(n: usize, trials: usize) -> Result<Vec<RankRow>> {
    let mut out = Vec::with_capacity(trials);
    let mut seed = 1000u64;
    while out.len() < trials {
        let mesh = jittered_delaunay_mesh(5, seed)?;
        for z in mesh.interior_vertices() {
            if out.len() == trials {
                break;
            }
            let kernel = crate::orthocheck::patch_nullspace(&mesh, z, n)?;
            out.push(RankRow { trial: out.len(), seed, vertex: z, valence: mesh.vertex_elements(z).len(), kernel });
        }
        seed += 1;
    }
    Ok(out)
}

/// Largest vicinity order reached by the growth loop over the interior
/// vertices of a structured mesh, and whether every vicinity is the vertex
/// patch itself.
pub fn structured_vicinity_orders(n: usize, p: usize) -> Result<(usize, bool)> {
    let mesh = generate_structured(2, n)?;
    let mut max = 0;
    let mut all_first = true;
    for z in mesh.interior_vertices() {
        let v = grow_vicinity(&mesh, z, p)?;
        max = max.max(v.order);
        all_first &= v.order == 1 && v.elements == element_patch(&mesh, Seed::Vertex(z), 1)?.elements;
    }
    Ok((max, all_first))
}
