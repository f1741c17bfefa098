//! Orthogonal representations of compact Lie algebras, isotropy and orbit types.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::tol::{BRACKET_TOL, RANK_REL_TOL, SKEW_TOL};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ActionError {
    #[error("action has no generators")]
    Empty,
    #[error("generator {index} has shape {rows}x{cols}, expected {n}x{n}")]
    Shape {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("declared {field} = {declared} but found {found}")]
    Declared {
        field: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("unknown built-in action `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid action: {0:?}")]
    Invalid(Vec<Violation>),
}

/// Serialized form: generators are row-major `n x n` matrices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ActionSpec {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub generators: Vec<Vec<Vec<f64>>>,
}

/// A basis `X_1..X_d` of a Lie algebra acting linearly on `R^n`.
///
/// The inner product on the algebra is the dot product of coefficient vectors
/// in this basis. [`GroupAction::orthonormalized`] rotates the basis so that
/// it agrees with the trace form `tr(A^T B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAction {
    name: String,
    n: usize,
    generators: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NotSkew { index: usize, residual: f64 },
    Dependent { min_gram_eigenvalue: f64 },
    NotClosed { i: usize, j: usize, residual: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub skew_residual: f64,
    pub min_gram_eigenvalue: f64,
    pub bracket_residual: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Isotropy subalgebra at a point, as coefficient vectors.
#[derive(Clone, Debug)]
pub struct IsotropyData {
    pub basis: Vec<DVector<f64>>,
}

impl IsotropyData {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Orbit-type label used to group sample points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StratumSignature {
    pub isotropy_dim: usize,
    pub fixed_subspace_dim: usize,
}

/// Sample points grouped by signature.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub signature: StratumSignature,
    pub representatives: Vec<DVector<f64>>,
    /// Isotropy algebra of each representative.
    pub isotropy: Vec<IsotropyData>,
}

impl GroupAction {
    pub fn new(name: impl Into<String>, n: usize, generators: Vec<DMatrix<f64>>) -> Result<Self, ActionError> {
        if generators.is_empty() {
            return Err(ActionError::Empty);
        }
        for (index, g) in generators.iter().enumerate() {
            if g.nrows() != n || g.ncols() != n {
                return Err(ActionError::Shape {
                    index,
                    rows: g.nrows(),
                    cols: g.ncols(),
                    n,
                });
            }
        }
        Ok(GroupAction {
            name: name.into(),
            n,
            generators,
        })
    }

    /// Build from the serialized form; checks shapes only.
    pub fn from_spec(spec: &ActionSpec) -> Result<Self, ActionError> {
        if spec.generators.len() != spec.d {
            return Err(ActionError::Declared {
                field: "d",
                declared: spec.d,
                found: spec.generators.len(),
            });
        }
        let mut gens = Vec::with_capacity(spec.d);
        for (index, rows) in spec.generators.iter().enumerate() {
            let r = rows.len();
            let c = rows.first().map_or(0, |row| row.len());
            if r != spec.n || rows.iter().any(|row| row.len() != spec.n) {
                return Err(ActionError::Shape {
                    index,
                    rows: r,
                    cols: c,
                    n: spec.n,
                });
            }
            let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
            gens.push(DMatrix::from_row_slice(spec.n, spec.n, &flat));
        }
        Self::new(spec.name.clone(), spec.n, gens)
    }

    pub fn to_spec(&self) -> ActionSpec {
        ActionSpec {
            name: self.name.clone(),
            n: self.n,
            d: self.d(),
            generators: self
                .generators
                .iter()
                .map(|g| (0..self.n).map(|i| g.row(i).iter().cloned().collect()).collect())
                .collect(),
        }
    }

    /// Built-in actions by name: `so2`, `so3`, `t2`.
    pub fn builtin(name: &str) -> Result<Self, ActionError> {
        match name {
            "so2" => Ok(Self::so2()),
            "so3" => Ok(Self::so3()),
            "t2" => Ok(Self::torus_t2()),
            other => Err(ActionError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Rotations of the plane, generator `[[0,-1],[1,0]]`.
    pub fn so2() -> Self {
        Self::new("so2", 2, vec![rotation_block(2, 0, 1)]).expect("valid shape")
    }

    /// Rotations of `R^3`, generators `L_x, L_y, L_z`.
    pub fn so3() -> Self {
        let gens = vec![rotation_block(3, 1, 2), rotation_block(3, 2, 0), rotation_block(3, 0, 1)];
        Self::new("so3", 3, gens).expect("valid shape")
    }

    /// The torus acting on `R^4 = R^2 + R^2` by independent rotations.
    pub fn torus_t2() -> Self {
        let gens = vec![rotation_block(4, 0, 1), rotation_block(4, 2, 3)];
        Self::new("t2", 4, gens).expect("valid shape")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// `sum_i t_i X_i`.
    pub fn element(&self, t: &[f64]) -> DMatrix<f64> {
        assert_eq!(t.len(), self.d(), "coefficient length");
        let mut m = DMatrix::zeros(self.n, self.n);
        for (c, g) in t.iter().zip(&self.generators) {
            if *c != 0.0 {
                m += g * *c;
            }
        }
        m
    }

    /// `n x d` matrix with columns `X_i x`; its column space is the orbit tangent.
    pub fn orbit_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.d());
        for (i, g) in self.generators.iter().enumerate() {
            m.column_mut(i).copy_from(&(g * x));
        }
        m
    }

    /// Gram matrix `tr(X_i^T X_j)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.generators[i].dot(&self.generators[j]))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut skew_residual: f64 = 0.0;
        for (index, g) in self.generators.iter().enumerate() {
            let r = (g + g.transpose()).amax();
            skew_residual = skew_residual.max(r);
            if r > SKEW_TOL {
                violations.push(Violation::NotSkew { index, residual: r });
            }
        }
        let gram = self.gram();
        let (eig, _) = linalg::sorted_symmetric_eigen(&gram);
        let min_eig = eig[0];
        let max_eig = *eig.last().expect("nonempty");
        let independent = min_eig > RANK_REL_TOL * max_eig.max(1.0);
        if !independent {
            violations.push(Violation::Dependent {
                min_gram_eigenvalue: min_eig,
            });
        }
        let mut bracket_residual: f64 = 0.0;
        if independent {
            let chol = gram.clone().cholesky().expect("positive definite gram");
            let d = self.d();
            for i in 0..d {
                for j in (i + 1)..d {
                    let c = &self.generators[i] * &self.generators[j] - &self.generators[j] * &self.generators[i];
                    let rhs = DVector::from_fn(d, |k, _| self.generators[k].dot(&c));
                    let coef = chol.solve(&rhs);
                    let mut rem = c.clone();
                    for k in 0..d {
                        rem -= &self.generators[k] * coef[k];
                    }
                    let r = rem.norm();
                    bracket_residual = bracket_residual.max(r);
                    if r > BRACKET_TOL {
                        violations.push(Violation::NotClosed { i, j, residual: r });
                    }
                }
            }
        }
        ValidationReport {
            skew_residual,
            min_gram_eigenvalue: min_eig,
            bracket_residual,
            violations,
        }
    }

    /// Validate and return an error listing every violation.
    pub fn checked(self) -> Result<Self, ActionError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(ActionError::Invalid(report.violations))
        }
    }

    /// Gram-Schmidt of the generators in the trace form, in order.
    pub fn orthonormalized(&self) -> Self {
        let mut out: Vec<DMatrix<f64>> = Vec::new();
        for g in &self.generators {
            let mut w = g.clone();
            for _ in 0..2 {
                for q in &out {
                    let c = q.dot(&w);
                    w -= q * c;
                }
            }
            let nrm = w.norm();
            if nrm > RANK_REL_TOL {
                out.push(w / nrm);
            }
        }
        GroupAction {
            name: self.name.clone(),
            n: self.n,
            generators: out,
        }
    }

    /// Isotropy algebra of `x`: the kernel of `t -> (sum t_i X_i) x`.
    pub fn isotropy_algebra(&self, x: &DVector<f64>) -> IsotropyData {
        IsotropyData {
            basis: linalg::null_space(&self.orbit_matrix(x)),
        }
    }

    /// Common isotropy of a pair of vectors.
    pub fn isotropy_algebra_pair(&self, x: &DVector<f64>, xi: &DVector<f64>) -> IsotropyData {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, self.d());
        m.view_mut((0, 0), (n, self.d())).copy_from(&self.orbit_matrix(x));
        m.view_mut((n, 0), (n, self.d())).copy_from(&self.orbit_matrix(xi));
        IsotropyData {
            basis: linalg::null_space(&m),
        }
    }

    /// Joint fixed space of an algebra given by coefficient vectors.
    pub fn fixed_subspace(&self, algebra: &[DVector<f64>]) -> Vec<DVector<f64>> {
        if algebra.is_empty() {
            return (0..self.n).map(|i| linalg::unit(self.n, i)).collect();
        }
        let n = self.n;
        let mut m = DMatrix::zeros(n * algebra.len(), n);
        for (k, a) in algebra.iter().enumerate() {
            let y = self.element(a.as_slice());
            m.view_mut((k * n, 0), (n, n)).copy_from(&y);
        }
        linalg::null_space(&m)
    }

    pub fn signature(&self, x: &DVector<f64>) -> StratumSignature {
        let iso = self.isotropy_algebra(x);
        StratumSignature {
            isotropy_dim: iso.dim(),
            fixed_subspace_dim: self.fixed_subspace(&iso.basis).len(),
        }
    }

    /// Largest orbit dimension seen over `samples` pseudorandom unit vectors.
    pub fn principal_orbit_dimension(&self, samples: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples.max(1))
            .map(|_| {
                let x = random_unit(&mut rng, self.n);
                linalg::numerical_rank(&self.orbit_matrix(&x))
            })
            .max()
            .unwrap_or(0)
    }

    /// Probe points that reach non-generic strata: the origin, generic points,
    /// points in fixed spaces of single generators and coordinate planes.
    pub fn probe_points(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = vec![DVector::zeros(n)];
        for _ in 0..count {
            pts.push(random_unit(&mut rng, n));
        }
        for g in &self.generators {
            let fix = linalg::null_space(g);
            if fix.is_empty() {
                continue;
            }
            for _ in 0..count.min(8).max(1) {
                pts.push(random_in_span(&mut rng, &fix));
            }
        }
        for i in 0..n {
            for j in i..n {
                let mut v = DVector::zeros(n);
                v[i] = rng.sample::<f64, _>(StandardNormal);
                v[j] += rng.sample::<f64, _>(StandardNormal);
                let nv = v.norm();
                if nv > 0.0 {
                    pts.push(v / nv);
                }
            }
        }
        pts
    }

    /// Group points by signature, ordered by decreasing isotropy dimension.
    pub fn stratify_sample(&self, points: &[DVector<f64>]) -> Vec<Stratum> {
        let mut map: BTreeMap<StratumSignature, Stratum> = BTreeMap::new();
        for p in points {
            let iso = self.isotropy_algebra(p);
            let sig = StratumSignature {
                isotropy_dim: iso.dim(),
                fixed_subspace_dim: self.fixed_subspace(&iso.basis).len(),
            };
            let entry = map.entry(sig).or_insert_with(|| Stratum {
                signature: sig,
                representatives: Vec::new(),
                isotropy: Vec::new(),
            });
            entry.representatives.push(p.clone());
            entry.isotropy.push(iso);
        }
        let mut out: Vec<Stratum> = map.into_values().collect();
        out.sort_by(|a, b| {
            b.signature
                .isotropy_dim
                .cmp(&a.signature.isotropy_dim)
                .then(b.signature.fixed_subspace_dim.cmp(&a.signature.fixed_subspace_dim))
        });
        out
    }
}

/// Generator of the rotation taking `e_i` toward `e_j`.
pub fn rotation_block(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(j, i)] = 1.0;
    m[(i, j)] = -1.0;
    m
}

pub(crate) fn random_unit(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let nv = v.norm();
        if nv > 1e-8 {
            return v / nv;
        }
    }
}

pub(crate) fn random_in_span(rng: &mut impl Rng, basis: &[DVector<f64>]) -> DVector<f64> {
    loop {
        let mut v = DVector::zeros(basis[0].len());
        for b in basis {
            v.axpy(rng.sample::<f64, _>(StandardNormal), b, 1.0);
        }
        let nv = v.norm();
        if nv > 1e-8 {
            return v / nv;
        }
    }
}
