//! Exact arithmetic and linear algebra over the prime field Z_p.
//!
//! Everything in this module is integer-only: elements are canonical
//! residues in `0..p`, and rank / inversion / row selection run Gaussian
//! elimination with exact modular arithmetic. No floating point is involved
//! anywhere, so results are bit-exact and independent of evaluation order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Trial-division primality check; sufficient for the small moduli in scope.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A prime field Z_p. Construction validates primality once; elements then
/// carry the modulus so mixed-field arithmetic is caught immediately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u16,
}

impl PrimeField {
    /// Largest prime representable in the element type.
    pub const MAX_MODULUS: u64 = 65521;

    /// Creates the field Z_p; fails unless `p` is prime and `p <= 65521`.
    pub fn new(p: u64) -> Result<Self> {
        if p > Self::MAX_MODULUS || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p: p as u16 })
    }

    /// The modulus p.
    pub fn p(self) -> u16 {
        self.p
    }

    /// Field size as `usize`, handy for table allocation.
    pub fn size(self) -> usize {
        self.p as usize
    }

    /// log2(p): the symbol entropy of a uniform element, in bits.
    pub fn bits(self) -> f64 {
        (self.p as f64).log2()
    }

    /// Canonical element for any integer, reduced into `0..p`.
    pub fn elem(self, v: i64) -> Gf {
        Gf {
            v: v.rem_euclid(self.p as i64) as u16,
            p: self.p,
        }
    }

    /// The additive identity.
    pub fn zero(self) -> Gf {
        Gf { v: 0, p: self.p }
    }

    /// The multiplicative identity.
    pub fn one(self) -> Gf {
        Gf {
            v: 1 % self.p,
            p: self.p,
        }
    }

    /// All field elements in ascending order of residue.
    pub fn elems(self) -> impl Iterator<Item = Gf> {
        let p = self.p;
        (0..p).map(move |v| Gf { v, p })
    }
}

/// An element of Z_p: a canonical residue plus its modulus.
///
/// Arithmetic between elements of different fields is a caller bug and
/// panics; fallible operations (inversion of zero) return errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf {
    v: u16,
    p: u16,
}

impl Gf {
    /// The canonical residue in `0..p`.
    pub fn value(self) -> u16 {
        self.v
    }

    /// The modulus this element lives under.
    pub fn modulus(self) -> u16 {
        self.p
    }

    /// The field this element belongs to.
    pub fn field(self) -> PrimeField {
        PrimeField { p: self.p }
    }

    /// True for the additive identity.
    pub fn is_zero(self) -> bool {
        self.v == 0
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Gf> {
        if self.v == 0 {
            return Err(Error::ZeroInverse);
        }
        // Invariant: old_r = old_s * p + (..) * v throughout; terminates with
        // old_r == gcd(p, v) == 1 because p is prime and v != 0.
        let (mut old_r, mut r) = (self.p as i64, self.v as i64);
        let (mut old_t, mut t) = (0i64, 1i64);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_t, t) = (t, old_t - q * t);
        }
        debug_assert_eq!(old_r, 1);
        Ok(self.field().elem(old_t))
    }

    fn check_same_field(self, rhs: Gf) {
        assert_eq!(
            self.p, rhs.p,
            "field modulus mismatch: {} vs {}",
            self.p, rhs.p
        );
    }
}

impl Add for Gf {
    type Output = Gf;
    fn add(self, rhs: Gf) -> Gf {
        self.check_same_field(rhs);
        let mut v = self.v as u32 + rhs.v as u32;
        if v >= self.p as u32 {
            v -= self.p as u32;
        }
        Gf {
            v: v as u16,
            p: self.p,
        }
    }
}

impl Sub for Gf {
    type Output = Gf;
    fn sub(self, rhs: Gf) -> Gf {
        self.check_same_field(rhs);
        let v = (self.v as u32 + self.p as u32 - rhs.v as u32) % self.p as u32;
        Gf {
            v: v as u16,
            p: self.p,
        }
    }
}

impl Mul for Gf {
    type Output = Gf;
    fn mul(self, rhs: Gf) -> Gf {
        self.check_same_field(rhs);
        let v = (self.v as u32 * rhs.v as u32) % self.p as u32;
        Gf {
            v: v as u16,
            p: self.p,
        }
    }
}

impl Neg for Gf {
    type Output = Gf;
    fn neg(self) -> Gf {
        Gf {
            v: if self.v == 0 { 0 } else { self.p - self.v },
            p: self.p,
        }
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

/// A dense row-major matrix over Z_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

impl GfMatrix {
    /// Builds a matrix from a flat row-major slice of integers (reduced
    /// mod p). Panics if the slice length does not match the shape.
    pub fn from_flat(field: PrimeField, rows: usize, cols: usize, values: &[i64]) -> Self {
        assert_eq!(
            values.len(),
            rows * cols,
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            values.len()
        );
        let data = values.iter().map(|&v| field.elem(v).value()).collect();
        Self {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Builds a matrix from explicit rows. Panics on ragged input.
    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            flat.extend_from_slice(row);
        }
        Self::from_flat(field, r, c, &flat)
    }

    /// The all-zero matrix.
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    /// The n-by-n identity.
    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one().value();
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Gf {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        Gf {
            v: self.data[r * self.cols + c],
            p: self.field.p(),
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: Gf) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        assert_eq!(v.modulus(), self.field.p(), "field modulus mismatch");
        self.data[r * self.cols + c] = v.value();
    }

    /// One row as a vector of elements.
    pub fn row(&self, r: usize) -> Vec<Gf> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    /// Raw residues in row-major order.
    pub fn values(&self) -> impl Iterator<Item = u16> + '_ {
        self.data.iter().copied()
    }

    /// A new matrix keeping only the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> GfMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &r in indices {
            assert!(r < self.rows, "row index out of bounds");
            data.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        GfMatrix {
            field: self.field,
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Matrix product; panics on shape or field mismatch.
    pub fn mul_matrix(&self, rhs: &GfMatrix) -> GfMatrix {
        assert_eq!(self.field, rhs.field, "field modulus mismatch");
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        let p = self.field.p() as u64;
        let mut out = GfMatrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] as u64 * rhs.data[k * rhs.cols + j] as u64;
                }
                out.data[i * rhs.cols + j] = (acc % p) as u16;
            }
        }
        out
    }

    /// Matrix-vector product; panics on shape or field mismatch.
    pub fn mul_vec(&self, v: &[Gf]) -> Vec<Gf> {
        assert_eq!(
            v.len(),
            self.cols,
            "shape mismatch in matrix-vector product"
        );
        let p = self.field.p() as u64;
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u64;
                for (k, x) in v.iter().enumerate() {
                    assert_eq!(x.modulus(), self.field.p(), "field modulus mismatch");
                    acc += self.data[i * self.cols + k] as u64 * x.value() as u64;
                }
                self.field.elem((acc % p) as i64)
            })
            .collect()
    }

    /// Rank over Z_p by forward elimination on a working copy.
    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        rank_of(&mut work, self.rows, self.cols, self.field)
    }

    /// Exact inverse via Gauss-Jordan elimination. Requires a square,
    /// nonsingular matrix; a singular input reports the rank it does have.
    pub fn inverse(&self) -> Result<GfMatrix> {
        assert_eq!(self.rows, self.cols, "inverse requires a square matrix");
        let n = self.rows;
        let p = self.field.p() as u32;
        // Augmented [self | I], eliminated in place.
        let mut a = self.data.clone();
        let mut inv = GfMatrix::identity(self.field, n).data;
        for col in 0..n {
            // Find a pivot at or below the diagonal.
            let pivot = (col..n).find(|&r| a[r * n + col] != 0);
            let pivot = match pivot {
                Some(r) => r,
                None => {
                    return Err(Error::RankDeficient {
                        rank: self.rank(),
                        need: n,
                    })
                }
            };
            if pivot != col {
                for c in 0..n {
                    a.swap(pivot * n + c, col * n + c);
                    inv.swap(pivot * n + c, col * n + c);
                }
            }
            let inv_pivot = Gf {
                v: a[col * n + col],
                p: self.field.p(),
            }
            .inv()
            .expect("pivot is nonzero")
            .value() as u32;
            // Normalize the pivot row.
            for c in 0..n {
                a[col * n + c] = (a[col * n + c] as u32 * inv_pivot % p) as u16;
                inv[col * n + c] = (inv[col * n + c] as u32 * inv_pivot % p) as u16;
            }
            // Clear the column everywhere else.
            for r in 0..n {
                if r == col || a[r * n + col] == 0 {
                    continue;
                }
                let factor = a[r * n + col] as u32;
                for c in 0..n {
                    let sub_a = factor * a[col * n + c] as u32 % p;
                    a[r * n + c] = ((a[r * n + c] as u32 + p - sub_a) % p) as u16;
                    let sub_i = factor * inv[col * n + c] as u32 % p;
                    inv[r * n + c] = ((inv[r * n + c] as u32 + p - sub_i) % p) as u16;
                }
            }
        }
        Ok(GfMatrix {
            field: self.field,
            rows: n,
            cols: n,
            data: inv,
        })
    }
}

impl fmt::Display for GfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[r * self.cols + c])?;
            }
            if r + 1 < self.rows {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Forward elimination on a raw row-major buffer; returns the rank.
fn rank_of(data: &mut [u16], rows: usize, cols: usize, field: PrimeField) -> usize {
    let p = field.p() as u32;
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&r| data[r * cols + col] != 0);
        let pivot = match pivot {
            Some(r) => r,
            None => continue,
        };
        if pivot != rank {
            for c in 0..cols {
                data.swap(pivot * cols + c, rank * cols + c);
            }
        }
        let inv_pivot = Gf {
            v: data[rank * cols + col],
            p: field.p(),
        }
        .inv()
        .expect("pivot is nonzero")
        .value() as u32;
        for r in (rank + 1)..rows {
            if data[r * cols + col] == 0 {
                continue;
            }
            let factor = data[r * cols + col] as u32 * inv_pivot % p;
            for c in col..cols {
                let sub = factor * data[rank * cols + c] as u32 % p;
                data[r * cols + c] = ((data[r * cols + c] as u32 + p - sub) % p) as u16;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Incremental independence tester: a growing row basis in reduced form.
///
/// `try_insert` reduces a candidate row against the basis and admits it only
/// if a nonzero remainder survives, i.e. exactly when the candidate is
/// linearly independent of everything admitted so far. This is the
/// independence oracle of the row matroid, so greedy selection over it is
/// optimal for any per-row weights.
pub(crate) struct RowBasis {
    field: PrimeField,
    cols: usize,
    /// Reduced rows together with their leading-column positions.
    rows: Vec<(usize, Vec<u16>)>,
}

impl RowBasis {
    pub(crate) fn new(field: PrimeField, cols: usize) -> Self {
        Self {
            field,
            cols,
            rows: Vec::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    /// Attempts to add `row` to the basis; returns true iff it was
    /// independent (and therefore admitted).
    pub(crate) fn try_insert(&mut self, row: &[Gf]) -> bool {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        let p = self.field.p() as u32;
        let mut work: Vec<u16> = row
            .iter()
            .map(|x| {
                assert_eq!(x.modulus(), self.field.p(), "field modulus mismatch");
                x.value()
            })
            .collect();
        for (lead, basis_row) in &self.rows {
            if work[*lead] == 0 {
                continue;
            }
            // basis rows are normalized to a unit leading entry
            let factor = work[*lead] as u32;
            for c in 0..self.cols {
                let sub = factor * basis_row[c] as u32 % p;
                work[c] = ((work[c] as u32 + p - sub) % p) as u16;
            }
        }
        let lead = match work.iter().position(|&v| v != 0) {
            Some(l) => l,
            None => return false,
        };
        let inv_lead = Gf {
            v: work[lead],
            p: self.field.p(),
        }
        .inv()
        .expect("leading entry is nonzero")
        .value() as u32;
        for v in work.iter_mut() {
            *v = (*v as u32 * inv_lead % p) as u16;
        }
        self.rows.push((lead, work));
        true
    }
}

/// Picks `q.cols()` linearly independent rows of `q` minimizing the total of
/// the given per-row weights (here: noise entropies), by greedy admission in
/// ascending weight order with ties broken toward the lower row index.
///
/// Linear independence of row subsets is a matroid, so the greedy choice is
/// globally optimal. Returns the selected row indices in ascending order, or
/// an error carrying the row rank when fewer than `q.cols()` independent
/// rows exist.
pub fn greedy_row_select(q: &GfMatrix, weights: &[f64]) -> Result<Vec<usize>> {
    assert_eq!(
        weights.len(),
        q.rows(),
        "one weight per row required ({} rows, {} weights)",
        q.rows(),
        weights.len()
    );
    let need = q.cols();
    let mut order: Vec<usize> = (0..q.rows()).collect();
    order.sort_by(|&a, &b| {
        weights[a]
            .partial_cmp(&weights[b])
            .expect("weights must be comparable (no NaN)")
            .then(a.cmp(&b))
    });
    let mut basis = RowBasis::new(q.field(), q.cols());
    let mut selected = Vec::with_capacity(need);
    for idx in order {
        if basis.try_insert(&q.row(idx)) {
            selected.push(idx);
            if selected.len() == need {
                selected.sort_unstable();
                return Ok(selected);
            }
        }
    }
    Err(Error::InfeasibleSelection {
        rank: basis.len(),
        need,
    })
}

/// The `index`-th vector of Z_p^len: base-p digits of `index`, most
/// significant digit first, so ascending index order coincides with
/// lexicographic order on the vectors.
pub fn vector_from_index(field: PrimeField, len: usize, index: u128) -> Vec<Gf> {
    let p = field.p() as u128;
    let mut v = vec![field.zero(); len];
    let mut rest = index;
    for slot in v.iter_mut().rev() {
        *slot = field.elem((rest % p) as i64);
        rest /= p;
    }
    debug_assert_eq!(rest, 0, "index out of range for Z_p^len");
    v
}

/// Inverse of [`vector_from_index`].
pub fn index_of_vector(v: &[Gf]) -> u128 {
    let mut idx = 0u128;
    for x in v {
        idx = idx * x.modulus() as u128 + x.value() as u128;
    }
    idx
}
