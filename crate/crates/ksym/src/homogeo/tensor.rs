//! Dense 3-index tensors and alternating forms on the reductive complement.
//!
//! A [`Tensor3`] is read either as a vector-valued bilinear map
//! `B(e_i, e_j) = Σ_k B[i,j,k] e_k` or as a trilinear form
//! `B(e_i, e_j, e_k)`. The two readings are related by
//! `B(X,Y,Z) = ⟨B(X,Y), Z⟩` through [`Tensor3::lower`] and [`Tensor3::raise`].

use nalgebra::{DMatrix, DVector};

/// 3-index real tensor of side `n`, stored at `(i*n + j)*n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    /// Zero tensor.
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    /// Tensor with entries `f(i, j, k)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t.data[(i * n + j) * n + k] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Vector-valued map built from `f(i, j) = B(e_i, e_j)`.
    pub fn from_vector_fn(n: usize, mut f: impl FnMut(usize, usize) -> DVector<f64>) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                t.data[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(v.as_slice());
            }
        }
        t
    }

    /// Side length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Raw data.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry `[i, j, k]`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// Sets entry `[i, j, k]`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
    }

    /// `B(e_i, e_j)` as a vector.
    pub fn vector(&self, i: usize, j: usize) -> DVector<f64> {
        let n = self.n;
        DVector::from_column_slice(&self.data[(i * n + j) * n..(i * n + j + 1) * n])
    }

    /// `B(x, y)` for the vector-valued reading.
    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let s = x[i] * y[j];
                if s == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += s * self.data[base + k];
                }
            }
        }
        out
    }

    /// `B(x, y, z)` for the trilinear reading.
    pub fn eval3(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        self.eval(x, y).dot(z)
    }

    /// Matrix `Y ↦ B(e_i, Y)`: entry `(k, j) = B[i, j, k]`.
    pub fn left_matrix(&self, i: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |k, j| self.get(i, j, k))
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Tensor3) -> Tensor3 {
        self.zip(other, |a, b| a + b)
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Tensor3) -> Tensor3 {
        self.zip(other, |a, b| a - b)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Tensor3 {
        assert_eq!(self.n, other.n, "tensor sizes differ");
        Tensor3 {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_slice(&self.data)
    }

    /// Largest absolute entrywise difference.
    pub fn max_diff(&self, other: &Tensor3) -> f64 {
        self.sub(other).max_abs()
    }

    /// Trilinear form `⟨B(X,Y), Z⟩` for the metric `gram`.
    pub fn lower(&self, gram: &DMatrix<f64>) -> Tensor3 {
        self.contract_last(&gram.transpose())
    }

    /// Vector-valued map `B♯` with `⟨B♯(X,Y), Z⟩ = B(X,Y,Z)`.
    pub fn raise(&self, gram: &DMatrix<f64>) -> Tensor3 {
        let inv = gram.clone().try_inverse().expect("metric must be invertible");
        self.contract_last(&inv.transpose())
    }

    /// Applies a linear map to the output slot: `(A∘B)[i,j,k] = Σ_c A[k,c] B[i,j,c]`.
    pub fn compose_out(&self, a: &DMatrix<f64>) -> Tensor3 {
        self.contract_last(a)
    }

    fn contract_last(&self, a: &DMatrix<f64>) -> Tensor3 {
        let n = self.n;
        let mut out = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let base = (i * n + j) * n;
                for k in 0..n {
                    let mut s = 0.0;
                    for c in 0..n {
                        s += a[(k, c)] * self.data[base + c];
                    }
                    out.data[base + k] = s;
                }
            }
        }
        out
    }

    /// Substitutes `A·` into slot `slot` (0, 1 or 2):
    /// for slot 0, `new[i,j,k] = Σ_a A[a,i] B[a,j,k]`, i.e. `B(AX, Y, Z)`.
    pub fn precompose(&self, slot: usize, a: &DMatrix<f64>) -> Tensor3 {
        let n = self.n;
        Tensor3::from_fn(n, |i, j, k| {
            let mut s = 0.0;
            for c in 0..n {
                let coeff = match slot {
                    0 => a[(c, i)],
                    1 => a[(c, j)],
                    _ => a[(c, k)],
                };
                if coeff == 0.0 {
                    continue;
                }
                s += coeff
                    * match slot {
                        0 => self.get(c, j, k),
                        1 => self.get(i, c, k),
                        _ => self.get(i, j, c),
                    };
            }
            s
        })
    }

    /// Substitutes `A`, `B`, `C` into the three slots: `T(AX, BY, CZ)`.
    pub fn precompose_all(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Tensor3 {
        self.precompose(0, a).precompose(1, b).precompose(2, c)
    }

    /// Slot permutation: `new(X₀,X₁,X₂) = B(X_{p[0]}, X_{p[1]}, X_{p[2]})`.
    pub fn permute(&self, p: [usize; 3]) -> Tensor3 {
        Tensor3::from_fn(self.n, |i, j, k| {
            let idx = [i, j, k];
            self.get(idx[p[0]], idx[p[1]], idx[p[2]])
        })
    }

    /// Sum of the three cyclic permutations: `B(X,Y,Z) + B(Y,Z,X) + B(Z,X,Y)`.
    pub fn skew_cyclic(&self) -> Tensor3 {
        self.add(&self.permute([1, 2, 0])).add(&self.permute([2, 0, 1]))
    }

    /// `max |B(X,Y,·) + B(Y,X,·)|`.
    pub fn antisymmetry12_residual(&self) -> f64 {
        self.add(&self.permute([1, 0, 2])).max_abs()
    }

    /// Distance to total antisymmetry: `max` over transpositions of `|B + B∘σ|`.
    pub fn total_skew_residual(&self) -> f64 {
        [[1, 0, 2], [0, 2, 1], [2, 1, 0]]
            .iter()
            .map(|p| self.add(&self.permute(*p)).max_abs())
            .fold(0.0, f64::max)
    }

    /// Fully antisymmetric 3-form with the same values (for a skew tensor).
    pub fn to_form(&self) -> AltForm {
        AltForm {
            n: self.n,
            p: 3,
            data: self.data.clone(),
        }
    }
}

/// Alternating `p`-form on an `n`-dimensional space, stored as a full
/// `n^p` array in row-major index order.
#[derive(Debug, Clone, PartialEq)]
pub struct AltForm {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl AltForm {
    /// Zero form of degree `p`.
    pub fn zeros(n: usize, p: usize) -> Self {
        AltForm {
            n,
            p,
            data: vec![0.0; n.pow(p as u32)],
        }
    }

    /// Form from raw full-array data.
    pub fn from_data(n: usize, p: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n.pow(p as u32), "form data length");
        AltForm { n, p, data }
    }

    /// Fully antisymmetrized form from arbitrary `n^p` data:
    /// `Σ_σ sign(σ) a∘σ / p!`.
    pub fn antisymmetrize(n: usize, p: usize, data: &[f64]) -> Self {
        let perms = permutations(p);
        let mut out = AltForm::zeros(n, p);
        let total = out.data.len();
        let mut idx = vec![0usize; p];
        let mut perm_idx = vec![0usize; p];
        let fact = perms.len() as f64;
        for flat in 0..total {
            unflatten(flat, n, &mut idx);
            let mut s = 0.0;
            for (perm, sign) in &perms {
                for (slot, &src) in perm.iter().enumerate() {
                    perm_idx[slot] = idx[src];
                }
                s += sign * data[flatten(&perm_idx, n)];
            }
            out.data[flat] = s / fact;
        }
        out
    }

    /// 2-form `ω(e_i, e_j) = m[(i, j)]` from an antisymmetric matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        AltForm {
            n,
            p: 2,
            data: (0..n * n).map(|f| m[(f / n, f % n)]).collect(),
        }
    }

    /// Dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Degree `p`.
    pub fn degree(&self) -> usize {
        self.p
    }

    /// Raw data.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Value on basis indices.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[flatten(idx, self.n)]
    }

    /// As a 3-index tensor (degree 3 only).
    pub fn to_tensor3(&self) -> Tensor3 {
        assert_eq!(self.p, 3, "degree must be 3");
        Tensor3 {
            n: self.n,
            data: self.data.clone(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_slice(&self.data)
    }

    /// Largest absolute entrywise difference.
    pub fn max_diff(&self, other: &AltForm) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "form shapes differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Distance to total antisymmetry over adjacent transpositions.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        let mut idx = vec![0usize; self.p];
        for flat in 0..self.data.len() {
            unflatten(flat, self.n, &mut idx);
            for s in 0..self.p.saturating_sub(1) {
                idx.swap(s, s + 1);
                let other = self.data[flatten(&idx, self.n)];
                idx.swap(s, s + 1);
                r = r.max((self.data[flat] + other).abs());
            }
        }
        r
    }

    /// Pullback by a linear map in every slot: `ω(A·, …, A·)`.
    pub fn pullback(&self, a: &DMatrix<f64>) -> AltForm {
        let mut cur = self.data.clone();
        let n = self.n;
        let mut idx = vec![0usize; self.p];
        for slot in 0..self.p {
            let mut next = vec![0.0; cur.len()];
            for (flat, out) in next.iter_mut().enumerate() {
                unflatten(flat, n, &mut idx);
                let i = idx[slot];
                let mut s = 0.0;
                for c in 0..n {
                    let coeff = a[(c, i)];
                    if coeff == 0.0 {
                        continue;
                    }
                    idx[slot] = c;
                    s += coeff * cur[flatten(&idx, n)];
                }
                *out = s;
            }
            cur = next;
        }
        AltForm {
            n,
            p: self.p,
            data: cur,
        }
    }
}

pub(crate) fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub(crate) fn unflatten(mut flat: usize, n: usize, idx: &mut [usize]) {
    for slot in (0..idx.len()).rev() {
        idx[slot] = flat % n;
        flat /= n;
    }
}

/// All permutations of `0..p` with their signs.
pub(crate) fn permutations(p: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..p).collect(), &mut out);
    out.into_iter()
        .map(|perm| {
            let mut inversions = 0;
            for a in 0..p {
                for b in (a + 1)..p {
                    if perm[a] > perm[b] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (perm, sign)
        })
        .collect()
}
