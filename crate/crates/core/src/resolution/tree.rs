//! Isotropy branches: chains of orbit types from the fixed space of the whole
//! group down to the principal type, with their blow-up frames.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ResolutionError;
use crate::action::{random_in_span, random_unit, GroupAction, StratumSignature};
use crate::critical::kappa;
use crate::linalg;
use crate::tol::{RANK_REL_TOL, TAU_MAX};

/// Fibre dimension `c`, complement dimension `d` and isotropy dimension `e` of one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelData {
    pub c: usize,
    pub d: usize,
    pub e: usize,
}

/// One blow-up level of a branch.
#[derive(Clone, Debug)]
pub struct BranchLevel {
    pub signature: StratumSignature,
    pub data: LevelData,
    /// Base points are `centre + Σ s_i dirs_i`, normalized when `on_sphere`.
    pub centre: DVector<f64>,
    pub base_dirs: Vec<DVector<f64>>,
    pub on_sphere: bool,
    /// Orthonormal frame of the normal fibre at this level.
    pub normal: Vec<DVector<f64>>,
    /// Complement of this level's isotropy inside the previous one (coefficient vectors).
    pub a_frame: Vec<DVector<f64>>,
    /// Isotropy algebra of this level (coefficient vectors).
    pub b_frame: Vec<DVector<f64>>,
}

#[derive(Clone, Debug)]
pub struct IsotropyBranch {
    pub action: GroupAction,
    pub kappa: usize,
    /// Signatures from the most singular stratum down to the principal one.
    pub chain: Vec<StratumSignature>,
    pub levels: Vec<BranchLevel>,
    /// Index of the normal-frame vector fixed to 1 in the sphere chart.
    pub rho: usize,
    pub t_max: f64,
    pub notes: Vec<String>,
}

impl IsotropyBranch {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn numerical_data(&self) -> Vec<LevelData> {
        self.levels.iter().map(|l| l.data).collect()
    }

    /// Predicted Jacobian exponent `c_j + Σ_{r<=j} d_r - 1` per level.
    pub fn jacobian_exponents(&self) -> Vec<i64> {
        let mut dsum = 0i64;
        self.levels
            .iter()
            .map(|l| {
                dsum += l.data.d as i64;
                l.data.c as i64 + dsum - 1
            })
            .collect()
    }

    /// The inequality `c_j + Σ_{r<=j} d_r - 1 >= κ` per level.
    pub fn lemma3(&self) -> Vec<bool> {
        self.jacobian_exponents().iter().map(|&v| v >= self.kappa as i64).collect()
    }

    pub fn label(&self) -> String {
        let sigs: Vec<String> = self
            .chain
            .iter()
            .map(|s| format!("({},{})", s.isotropy_dim, s.fixed_subspace_dim))
            .collect();
        format!("{}:{}", self.action.name(), sigs.join("->"))
    }
}

/// Coefficient vectors of the whole algebra.
fn full_algebra(d: usize) -> Vec<DVector<f64>> {
    (0..d).map(|i| linalg::unit(d, i)).collect()
}

/// Vectors of `span(basis)` annihilated by every element of `algebra`.
fn fixed_in(action: &GroupAction, algebra: &[DVector<f64>], basis: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if basis.is_empty() {
        return Vec::new();
    }
    if algebra.is_empty() {
        return basis.to_vec();
    }
    let n = action.n();
    let v = linalg::columns_matrix(basis, n);
    let mut m = DMatrix::zeros(n * algebra.len(), basis.len());
    for (k, a) in algebra.iter().enumerate() {
        let y = action.element(a.as_slice());
        m.view_mut((k * n, 0), (n, basis.len())).copy_from(&(y * &v));
    }
    let coeffs = linalg::null_space(&m);
    linalg::gram_schmidt(&coeffs.iter().map(|c| &v * c).collect::<Vec<_>>(), RANK_REL_TOL)
}

/// Same subalgebra, compared through projectors.
fn same_span(a: &[DVector<f64>], b: &[DVector<f64>]) -> bool {
    a.len() == b.len() && linalg::span_contained(a, b, 1e-8)
}

/// Probe directions inside `span(basis)`: generic ones plus fixed vectors of
/// single algebra elements.
fn probes_in(action: &GroupAction, basis: &[DVector<f64>], algebra: &[DVector<f64>], rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = action.n();
    let mut out = Vec::new();
    if basis.is_empty() {
        return out;
    }
    let v = linalg::columns_matrix(basis, n);
    for _ in 0..32 {
        let c = random_unit(rng, basis.len());
        out.push(&v * c);
    }
    for a in algebra {
        let fixed = fixed_in(action, std::slice::from_ref(a), basis);
        if fixed.is_empty() {
            continue;
        }
        for _ in 0..4 {
            out.push(random_in_span(rng, &fixed));
        }
    }
    for b in basis {
        out.push(b.clone());
    }
    out
}

struct Candidate {
    sig: StratumSignature,
    q: DVector<f64>,
    algebras: Vec<Vec<DVector<f64>>>,
}

/// Enumerate the maximal chains of orbit types starting at the fixed space of
/// the whole group. Depths beyond 2 are rejected.
pub fn build_isotropy_tree(action: &GroupAction) -> Result<Vec<IsotropyBranch>, ResolutionError> {
    let report = action.validate();
    if !report.is_valid() {
        return Err(ResolutionError::InvalidAction(format!("{:?}", report.violations)));
    }
    let n = action.n();
    let d = action.d();
    let k = kappa(action);
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let gens = full_algebra(d);
    let fix_g = action.fixed_subspace(&gens);
    let nu1 = linalg::orthogonal_complement(&fix_g, n);
    let principal_dim = d - k;

    let top_sig = StratumSignature {
        isotropy_dim: d,
        fixed_subspace_dim: fix_g.len(),
    };
    let level1 = BranchLevel {
        signature: top_sig,
        data: LevelData { c: nu1.len(), d: 0, e: d },
        centre: DVector::zeros(n),
        base_dirs: fix_g.clone(),
        on_sphere: false,
        normal: nu1.clone(),
        a_frame: Vec::new(),
        b_frame: gens.clone(),
    };

    // Singular types met on the unit sphere of the first normal fibre.
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut principal_sig = None;
    for p in probes_in(action, &nu1, &gens, &mut rng) {
        let q = linalg::project(&p, &nu1);
        let nq = q.norm();
        if nq < 1e-8 {
            continue;
        }
        let q = q / nq;
        let iso = action.isotropy_algebra(&q);
        let sig = StratumSignature {
            isotropy_dim: iso.dim(),
            fixed_subspace_dim: action.fixed_subspace(&iso.basis).len(),
        };
        if iso.dim() == principal_dim {
            principal_sig.get_or_insert(sig);
            continue;
        }
        match candidates.iter_mut().find(|c| c.sig == sig) {
            Some(c) => {
                if !c.algebras.iter().any(|a| same_span(a, &iso.basis)) {
                    c.algebras.push(iso.basis);
                }
            }
            None => candidates.push(Candidate {
                sig,
                q,
                algebras: vec![iso.basis],
            }),
        }
    }
    let principal_sig = principal_sig.ok_or_else(|| ResolutionError::InvalidAction("no principal point found".into()))?;
    candidates.sort_by(|a, b| b.sig.cmp(&a.sig));

    let mut branches = Vec::new();
    if candidates.is_empty() {
        check_principal_sphere(action, &DVector::zeros(n), &gens, &nu1, principal_dim, 1, &mut rng)?;
        branches.push(IsotropyBranch {
            action: action.clone(),
            kappa: k,
            chain: vec![top_sig, principal_sig],
            levels: vec![level1],
            rho: 0,
            t_max: TAU_MAX,
            notes: Vec::new(),
        });
        return Ok(branches);
    }
    for Candidate { sig, q, mut algebras } in candidates {
        let h = algebras.swap_remove(0);
        let mut notes = Vec::new();
        if !algebras.is_empty() {
            notes.push(format!(
                "signature ({}, {}) covers several isotropy algebras; the branch is built at the first representative",
                sig.isotropy_dim, sig.fixed_subspace_dim
            ));
        }
        // Stratum through q inside the sphere: the unit sphere of W = Fix(h) ∩ ν¹.
        let w = fixed_in(action, &h, &nu1);
        let tangent: Vec<DVector<f64>> = action
            .generators()
            .iter()
            .map(|g| g * &q)
            .collect();
        if !linalg::span_contained(&tangent, &w, 1e-8) {
            return Err(ResolutionError::UnsupportedStratum(format!(
                "orbit through the ({}, {}) representative leaves its fixed space",
                sig.isotropy_dim, sig.fixed_subspace_dim
            )));
        }
        let mut w_rest = vec![q.clone()];
        w_rest.extend(w.iter().cloned());
        let w_basis = linalg::gram_schmidt(&w_rest, 1e-8);
        let base_dirs: Vec<DVector<f64>> = w_basis[1..].to_vec();
        let mut span_fw = fix_g.clone();
        span_fw.extend(w_basis.iter().cloned());
        let nu2 = linalg::orthogonal_complement(&linalg::gram_schmidt(&span_fw, 1e-8), n);
        let a2 = linalg::orthogonal_complement(&h, d);
        check_principal_sphere(action, &q, &h, &nu2, principal_dim, 2, &mut rng)?;
        let level2 = BranchLevel {
            signature: sig,
            data: LevelData {
                c: nu2.len(),
                d: a2.len(),
                e: h.len(),
            },
            centre: q,
            base_dirs,
            on_sphere: true,
            normal: nu2,
            a_frame: a2,
            b_frame: h,
        };
        branches.push(IsotropyBranch {
            action: action.clone(),
            kappa: k,
            chain: vec![top_sig, sig, principal_sig],
            levels: vec![level1.clone(), level2],
            rho: 0,
            t_max: TAU_MAX,
            notes,
        });
    }
    Ok(branches)
}

/// Every direction of the last normal fibre must lead to the principal type,
/// otherwise the branch would need another level.
fn check_principal_sphere(
    action: &GroupAction,
    base: &DVector<f64>,
    isotropy: &[DVector<f64>],
    normal: &[DVector<f64>],
    principal_dim: usize,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(), ResolutionError> {
    for v in probes_in(action, normal, isotropy, rng) {
        let nv = v.norm();
        if nv < 1e-8 {
            continue;
        }
        let dim = if base.norm() == 0.0 {
            action.isotropy_algebra(&(v / nv)).dim()
        } else {
            action.isotropy_algebra_pair(base, &(v / nv)).dim()
        };
        if dim != principal_dim {
            return Err(ResolutionError::UnsupportedDepth { depth: depth + 1 });
        }
    }
    Ok(())
}
