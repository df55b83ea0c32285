//! The pole-number-table scheme.
//!
//! With `m` even, `d = m(n - 1) + 2X - 1` and the curve `y^2 = f(x)` of degree
//! `d`, the `A` side is encoded with functions of pole orders
//! `phi = (0, 2, ..., 2X - 2, d, d + 1, ..., d + m - 1)` and the `B` side with
//! `gamma = (0, 2, ..., 2X - 2, m + 2X - 2, 2m + 2X - 2, ..., mn + 2X - 2)`.
//! The first `X` functions on both sides are `1, x, ..., x^(X-1)` and carry the
//! random masks. Every product `A_j B_j'` lands on its own pole number in the
//! bottom-right quadrant of `phi + gamma`, above everything else in the table,
//! so solving for the coefficients of `h = f g` at the worker places isolates
//! the block products.
//!
//! When `m` is odd but `n` is even the two sequences trade places: `A` is
//! encoded with `gamma` (built for `n`) and `B` with `phi`. Function
//! multiplication commutes, so nothing else changes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, FieldSpec, MAX_MODULUS};
use crate::function_field::{CurveDescriptor, HyperellipticCurve, Monomial, Place};
use crate::linalg::{BlockVector, LuFactorization, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Number of row blocks of `A`.
    pub m: u64,
    /// Number of column blocks of `B`.
    pub n: u64,
    /// Collusion threshold.
    pub x: u64,
    /// Field size; the smallest admissible prime is chosen when absent.
    pub q: Option<u64>,
    pub seed: u64,
}

impl SchemeParams {
    pub fn new(m: u64, n: u64, x: u64) -> Self {
        SchemeParams {
            m,
            n,
            x,
            q: None,
            seed: 0,
        }
    }

    pub fn with_q(mut self, q: u64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The outer sum `phi + gamma` and its distinct values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoleTable {
    pub rows: Vec<u64>,
    pub cols: Vec<u64>,
    pub table: Vec<Vec<u64>>,
    /// Sorted distinct entries.
    pub distinct: Vec<u64>,
}

pub fn pole_number_table(phi: &[u64], gamma: &[u64]) -> PoleTable {
    let table: Vec<Vec<u64>> = phi
        .iter()
        .map(|&p| gamma.iter().map(|&g| p + g).collect())
        .collect();
    let max = table.iter().flatten().copied().max().unwrap_or(0) as usize;
    let mut present = vec![false; max + 1];
    for &v in table.iter().flatten() {
        present[v as usize] = true;
    }
    let distinct = (0..=max as u64).filter(|&v| present[v as usize]).collect();
    PoleTable {
        rows: phi.to_vec(),
        cols: gamma.to_vec(),
        table,
        distinct,
    }
}

/// Pole-number sequences and table for one parameter choice.
///
/// `m`, `n` here are in the construction's orientation (`m` even); see
/// [`PoleStructure::transposed`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoleStructure {
    pub m: u64,
    pub n: u64,
    pub x: u64,
    /// Set when the caller's `m` was odd and the roles of `m` and `n` were
    /// exchanged.
    pub transposed: bool,
    pub d: u64,
    pub g: u64,
    pub phi: Vec<u64>,
    pub gamma: Vec<u64>,
    pub table: Vec<Vec<u64>>,
    pub distinct_poles: Vec<u64>,
    /// `phi[X + j] + gamma[X + j']`, row-major over `(j, j')`.
    pub recovery_poles: Vec<u64>,
    /// Degree of `G = (2mn + 4X - 4) P_inf`.
    pub deg_g: u64,
    /// Degree of `G' = (mn + 4X - 4) P_inf`.
    pub deg_g_prime: u64,
}

impl PoleStructure {
    pub fn workers(&self) -> usize {
        self.distinct_poles.len()
    }

    /// `(3/2) mn + (1/2) m + 3X - 2` with `m` the even partition count.
    pub fn worker_bound(&self) -> u64 {
        worker_bound_even(self.m, self.n, self.x)
    }

    /// Pole numbers of the functions that encode `A`.
    pub fn a_poles(&self) -> &[u64] {
        if self.transposed {
            &self.gamma
        } else {
            &self.phi
        }
    }

    pub fn b_poles(&self) -> &[u64] {
        if self.transposed {
            &self.phi
        } else {
            &self.gamma
        }
    }

    /// Number of row blocks `A` is split into.
    pub fn a_blocks(&self) -> u64 {
        if self.transposed {
            self.n
        } else {
            self.m
        }
    }

    /// Number of column blocks `B` is split into.
    pub fn b_blocks(&self) -> u64 {
        if self.transposed {
            self.m
        } else {
            self.n
        }
    }
}

fn worker_bound_even(m_even: u64, other: u64, x: u64) -> u64 {
    (3 * m_even * other + m_even) / 2 + 3 * x - 2
}

pub fn derive_parameters(params: &SchemeParams) -> Result<PoleStructure> {
    let SchemeParams { m, n, x, .. } = *params;
    if m == 0 || n == 0 || x == 0 {
        return Err(Error::InvalidParameters(format!(
            "m, n and X must be positive (got m = {m}, n = {n}, X = {x})"
        )));
    }
    let (m_even, other, transposed) = if m % 2 == 0 {
        (m, n, false)
    } else if n % 2 == 0 {
        (n, m, true)
    } else {
        return Err(Error::UnsupportedParameters(format!(
            "m = {m} and n = {n} are both odd; one partition count must be even"
        )));
    };
    let (m, n) = (m_even, other);
    let d = m * (n - 1) + 2 * x - 1;
    if d < 3 {
        return Err(Error::UnsupportedParameters(format!(
            "d = m(n - 1) + 2X - 1 = {d} gives a genus-0 curve; need d >= 3"
        )));
    }
    let masks: Vec<u64> = (0..x).map(|k| 2 * k).collect();
    let phi: Vec<u64> = masks.iter().copied().chain((0..m).map(|j| d + j)).collect();
    let gamma: Vec<u64> = masks
        .iter()
        .copied()
        .chain((1..=n).map(|j| j * m + 2 * x - 2))
        .collect();
    let x_us = x as usize;
    let recovery_poles = phi[x_us..]
        .iter()
        .flat_map(|&p| gamma[x_us..].iter().map(move |&g| p + g))
        .collect();
    let table = pole_number_table(&phi, &gamma);
    Ok(PoleStructure {
        m,
        n,
        x,
        transposed,
        d,
        g: (d - 1) / 2,
        phi,
        gamma,
        table: table.table,
        distinct_poles: table.distinct,
        recovery_poles,
        deg_g: 2 * m * n + 4 * x - 4,
        deg_g_prime: m * n + 4 * x - 4,
    })
}

/// The curve `y^2 = x (x - 1) ... (x - d + 1)` over `F_q`.
pub fn standard_curve(field: FieldSpec, d: u64) -> Result<HyperellipticCurve> {
    if field.order() <= d {
        return Err(Error::InvalidParameters(format!(
            "q = {} must exceed d = {d} to host d distinct roots",
            field.order()
        )));
    }
    let roots: Vec<u64> = (0..d).collect();
    HyperellipticCurve::from_raw_roots(field, &roots)
}

/// Evaluations of `functions` at `places`: one row per function.
pub fn generator_matrix(
    curve: &HyperellipticCurve,
    functions: &[Monomial],
    places: &[Place],
) -> Result<Matrix> {
    let mut data = Vec::with_capacity(functions.len() * places.len());
    for &f in functions {
        for p in places {
            data.push(curve.evaluate_raw(f, p)?);
        }
    }
    Matrix::new(curve.field(), functions.len(), places.len(), data)
}

/// Encoded shares for one side, share `i` going to worker `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedShares {
    pub side: Side,
    pub shares: BlockVector,
}

/// Encoding half of the scheme: the two function families evaluated at a fixed
/// list of worker places.
#[derive(Debug, Clone)]
pub struct ShareEncoder {
    field: FieldSpec,
    x: usize,
    a_blocks: usize,
    b_blocks: usize,
    a_functions: Vec<Monomial>,
    b_functions: Vec<Monomial>,
    /// `(a_blocks + X) x N`, rows ordered masks first.
    a_generator: Matrix,
    b_generator: Matrix,
    a_share_map: Matrix,
    b_share_map: Matrix,
}

impl ShareEncoder {
    pub fn new(
        poles: &PoleStructure,
        curve: &HyperellipticCurve,
        places: &[Place],
    ) -> Result<Self> {
        let to_monomials = |ps: &[u64]| -> Result<Vec<Monomial>> {
            ps.iter()
                .map(|&w| curve.monomial_for_pole_number(w))
                .collect()
        };
        let a_functions = to_monomials(poles.a_poles())?;
        let b_functions = to_monomials(poles.b_poles())?;
        let a_generator = generator_matrix(curve, &a_functions, places)?;
        let b_generator = generator_matrix(curve, &b_functions, places)?;
        Ok(ShareEncoder {
            field: curve.field(),
            x: poles.x as usize,
            a_blocks: poles.a_blocks() as usize,
            b_blocks: poles.b_blocks() as usize,
            a_share_map: a_generator.transpose(),
            b_share_map: b_generator.transpose(),
            a_functions,
            b_functions,
            a_generator,
            b_generator,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn collusion(&self) -> usize {
        self.x
    }

    pub fn workers(&self) -> usize {
        self.a_generator.cols()
    }

    pub fn blocks(&self, side: Side) -> usize {
        match side {
            Side::A => self.a_blocks,
            Side::B => self.b_blocks,
        }
    }

    pub fn functions(&self, side: Side) -> &[Monomial] {
        match side {
            Side::A => &self.a_functions,
            Side::B => &self.b_functions,
        }
    }

    pub fn generator(&self, side: Side) -> &Matrix {
        match side {
            Side::A => &self.a_generator,
            Side::B => &self.b_generator,
        }
    }

    /// Rows of the generator that multiply the random masks.
    pub fn security_generator(&self, side: Side) -> Matrix {
        let g = self.generator(side);
        g.block(0, 0, self.x, g.cols())
    }

    /// Splits `A` into row blocks or `B` into column blocks.
    pub fn partition(&self, side: Side, matrix: &Matrix) -> Result<Vec<Matrix>> {
        if matrix.field() != self.field {
            return Err(Error::FieldMismatch {
                left: self.field.order(),
                right: matrix.field().order(),
            });
        }
        let parts = self.blocks(side);
        let (rows, cols) = matrix.shape();
        match side {
            Side::A => {
                if rows == 0 || rows % parts != 0 || cols == 0 {
                    return Err(Error::ShapeMismatch(format!(
                        "A has {rows} rows, not a positive multiple of {parts}"
                    )));
                }
                let h = rows / parts;
                Ok((0..parts)
                    .map(|j| matrix.block(j * h, 0, h, cols))
                    .collect())
            }
            Side::B => {
                if cols == 0 || cols % parts != 0 || rows == 0 {
                    return Err(Error::ShapeMismatch(format!(
                        "B has {cols} columns, not a positive multiple of {parts}"
                    )));
                }
                let w = cols / parts;
                Ok((0..parts)
                    .map(|j| matrix.block(0, j * w, rows, w))
                    .collect())
            }
        }
    }

    pub fn block_shape(&self, side: Side, matrix: &Matrix) -> Result<(usize, usize)> {
        Ok(self.partition(side, matrix)?[0].shape())
    }

    /// Uniformly random masks `R_1..R_X` (or `S_1..S_X`) of the given shape.
    pub fn random_masks(&self, shape: (usize, usize), rng: &mut impl Rng) -> Vec<Matrix> {
        (0..self.x)
            .map(|_| random_matrix(self.field, shape.0, shape.1, rng))
            .collect()
    }

    /// Shares with caller-supplied masks.
    pub fn encode_with_masks(
        &self,
        side: Side,
        matrix: &Matrix,
        masks: &[Matrix],
    ) -> Result<EncodedShares> {
        let parts = self.partition(side, matrix)?;
        if masks.len() != self.x {
            return Err(Error::ShapeMismatch(format!(
                "{} masks supplied, need {}",
                masks.len(),
                self.x
            )));
        }
        let coeffs = BlockVector::new(masks.iter().cloned().chain(parts).collect())?;
        let map = match side {
            Side::A => &self.a_share_map,
            Side::B => &self.b_share_map,
        };
        Ok(EncodedShares {
            side,
            shares: map.mul_blocks(&coeffs)?,
        })
    }

    pub fn encode(&self, side: Side, matrix: &Matrix, rng: &mut impl Rng) -> Result<EncodedShares> {
        let shape = self.block_shape(side, matrix)?;
        let masks = self.random_masks(shape, rng);
        self.encode_with_masks(side, matrix, &masks)
    }
}

pub fn random_matrix(field: FieldSpec, rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let q = field.order();
    Matrix::from_fn(field, rows, cols, |_, _| rng.gen_range(0..q))
}

/// A fully built scheme: curve, worker places, and the decoder.
#[derive(Debug, Clone)]
pub struct SchemeInstance {
    params: SchemeParams,
    poles: PoleStructure,
    curve: HyperellipticCurve,
    candidate_places: Vec<Place>,
    places: Vec<Place>,
    basis: Vec<Monomial>,
    evaluation: Matrix,
    lu: LuFactorization,
    encoder: ShareEncoder,
    /// Basis index holding `A_j B_j'`, row-major over `(j, j')`.
    recovery_index: Vec<usize>,
}

impl SchemeInstance {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn poles(&self) -> &PoleStructure {
        &self.poles
    }

    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }

    pub fn field(&self) -> FieldSpec {
        self.curve.field()
    }

    pub fn candidate_places(&self) -> &[Place] {
        &self.candidate_places
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    /// `V[i][t]` = basis function `t` at worker place `i`.
    pub fn evaluation_matrix(&self) -> &Matrix {
        &self.evaluation
    }

    pub fn encoder(&self) -> &ShareEncoder {
        &self.encoder
    }

    pub fn workers(&self) -> usize {
        self.places.len()
    }

    pub fn encode(&self, side: Side, matrix: &Matrix, rng: &mut impl Rng) -> Result<EncodedShares> {
        self.encoder.encode(side, matrix, rng)
    }

    /// Recovers `AB` from all `N` worker responses, in worker order.
    pub fn decode(&self, responses: &BlockVector) -> Result<Matrix> {
        if responses.len() != self.workers() {
            return Err(Error::ShapeMismatch(format!(
                "{} responses for {} workers",
                responses.len(),
                self.workers()
            )));
        }
        let (r, c) = responses.block_shape();
        let coeffs = self.lu.solve_blocks(responses)?;
        let (mb, nb) = (
            self.poles.a_blocks() as usize,
            self.poles.b_blocks() as usize,
        );
        let mut out = Matrix::zeros(self.field(), mb * r, nb * c);
        for j in 0..mb {
            for jp in 0..nb {
                let t = self.recovery_index[j * nb + jp];
                out.set_block(j * r, jp * c, &coeffs.blocks()[t]);
            }
        }
        Ok(out)
    }

    /// Like [`decode`](Self::decode) but accepts `(worker index, response)`
    /// pairs in any order.
    pub fn decode_indexed(
        &self,
        responses: impl IntoIterator<Item = (usize, Matrix)>,
    ) -> Result<Matrix> {
        let n = self.workers();
        let mut slots: Vec<Option<Matrix>> = vec![None; n];
        for (i, resp) in responses {
            let slot = slots.get_mut(i).ok_or_else(|| {
                Error::ShapeMismatch(format!("response from worker {i}, only {n} workers"))
            })?;
            if slot.replace(resp).is_some() {
                return Err(Error::ShapeMismatch(format!(
                    "duplicate response from worker {i}"
                )));
            }
        }
        let blocks = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| Error::ShapeMismatch(format!("missing response from worker {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.decode(&BlockVector::new(blocks)?)
    }

    /// Dimension of the star product of the two codes over the candidate
    /// places, from the rank of all pairwise products of generator rows.
    pub fn star_product_dimension(&self) -> Result<usize> {
        let ga = generator_matrix(
            &self.curve,
            self.encoder.functions(Side::A),
            &self.candidate_places,
        )?;
        let gb = generator_matrix(
            &self.curve,
            self.encoder.functions(Side::B),
            &self.candidate_places,
        )?;
        let f = self.field();
        let cols = self.candidate_places.len();
        let mut data = Vec::with_capacity(ga.rows() * gb.rows() * cols);
        for i in 0..ga.rows() {
            for k in 0..gb.rows() {
                data.extend(ga.row(i).iter().zip(gb.row(k)).map(|(&a, &b)| f.mul(a, b)));
            }
        }
        Ok(Matrix::new(f, ga.rows() * gb.rows(), cols, data)?.rank())
    }

    pub fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            m: self.params.m,
            n: self.params.n,
            x: self.params.x,
            q: self.field().order(),
            seed: self.params.seed,
            d: self.poles.d,
            genus: self.poles.g,
            phi: self.poles.phi.clone(),
            gamma: self.poles.gamma.clone(),
            workers: self.workers(),
            curve: CurveRoots {
                roots: self.curve.roots().to_vec(),
            },
            places: self
                .places
                .iter()
                .filter_map(Place::coordinates)
                .map(|(x, y)| PlacePoint { x, y })
                .collect(),
        }
    }

    /// Rebuilds an instance from its descriptor and checks that the rebuilt
    /// curve and places agree with it.
    pub fn from_descriptor(desc: &SchemeDescriptor) -> Result<Self> {
        let params = SchemeParams::new(desc.m, desc.n, desc.x)
            .with_q(desc.q)
            .with_seed(desc.seed);
        let inst = build_scheme(&params)?;
        let rebuilt = inst.descriptor();
        if rebuilt != *desc {
            return Err(Error::Verification(
                "scheme descriptor does not match the instance rebuilt from its parameters".into(),
            ));
        }
        Ok(inst)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRoots {
    pub roots: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacePoint {
    pub x: u64,
    pub y: u64,
}

/// JSON form of a built scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub m: u64,
    pub n: u64,
    #[serde(rename = "X")]
    pub x: u64,
    pub q: u64,
    pub seed: u64,
    pub d: u64,
    pub genus: u64,
    pub phi: Vec<u64>,
    pub gamma: Vec<u64>,
    #[serde(rename = "N")]
    pub workers: usize,
    pub curve: CurveRoots,
    pub places: Vec<PlacePoint>,
}

impl SchemeDescriptor {
    pub fn curve_descriptor(&self) -> CurveDescriptor {
        CurveDescriptor {
            q: self.q,
            roots: self.curve.roots.clone(),
            d: self.d,
            genus: self.genus,
        }
    }
}

/// Builds the curve over `F_q` and its distinct-x candidate places, failing if
/// there are fewer than `required`.
fn curve_with_candidates(
    field: FieldSpec,
    d: u64,
    required: usize,
) -> Result<(HyperellipticCurve, Vec<Place>)> {
    let curve = standard_curve(field, d)?;
    let candidates = curve.select_distinct_x_places();
    if candidates.len() < required {
        return Err(Error::TooFewPlaces {
            q: field.order(),
            available: candidates.len(),
            required,
        });
    }
    Ok((curve, candidates))
}

/// Smallest odd prime `q > d` whose curve has at least `required` places with
/// distinct x-coordinates.
pub fn select_field(d: u64, required: usize) -> Result<FieldSpec> {
    let mut q = field::next_odd_prime_after(d);
    while q < MAX_MODULUS {
        // a field of size q has at most q distinct x-coordinates
        if q as usize >= required {
            let spec = FieldSpec::new(q)?;
            if standard_curve(spec, d)?.select_distinct_x_places().len() >= required {
                return Ok(spec);
            }
        }
        q = field::next_odd_prime_after(q);
    }
    Err(Error::InvalidParameters(format!(
        "no supported field hosts {required} places for d = {d}"
    )))
}

pub fn build_scheme(params: &SchemeParams) -> Result<SchemeInstance> {
    let poles = derive_parameters(params)?;
    let required = poles.deg_g as usize + 1;
    let field = match params.q {
        Some(q) => FieldSpec::new(q)?,
        None => select_field(poles.d, required)?,
    };
    let (curve, candidate_places) = curve_with_candidates(field, poles.d, required)?;

    let basis = poles
        .distinct_poles
        .iter()
        .map(|&w| curve.monomial_for_pole_number(w))
        .collect::<Result<Vec<_>>>()?;
    let full = generator_matrix(&curve, &basis, &candidate_places)?;
    let info = full.select_information_columns()?;
    let places: Vec<Place> = info.iter().map(|&i| candidate_places[i]).collect();
    let evaluation = full.select_columns(&info).transpose();
    let lu = LuFactorization::new(&evaluation)?;
    let encoder = ShareEncoder::new(&poles, &curve, &places)?;

    let x = poles.x as usize;
    let (a_poles, b_poles) = (poles.a_poles(), poles.b_poles());
    let recovery_index = a_poles[x..]
        .iter()
        .flat_map(|&p| b_poles[x..].iter().map(move |&g| p + g))
        .map(|w| {
            poles
                .distinct_poles
                .binary_search(&w)
                .expect("recovery pole is a table entry")
        })
        .collect();

    Ok(SchemeInstance {
        params: *params,
        poles,
        curve,
        candidate_places,
        places,
        basis,
        evaluation,
        lu,
        encoder,
        recovery_index,
    })
}

/// The encoding layer alone over every distinct-x place of the curve over
/// `F_q`, without requiring enough places for decoding. Used to audit secrecy
/// at field sizes too small to host a decodable instance.
pub fn candidate_encoder(params: &SchemeParams, q: u64) -> Result<(PoleStructure, ShareEncoder)> {
    let poles = derive_parameters(params)?;
    let field = FieldSpec::new(q)?;
    let curve = standard_curve(field, poles.d)?;
    let places = curve.select_distinct_x_places();
    let encoder = ShareEncoder::new(&poles, &curve, &places)?;
    Ok((poles, encoder))
}
