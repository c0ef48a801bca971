use serde::{Deserialize, Serialize};

use super::saturation::saturation_auto;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Strauss,
    Saturation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// Intercept and covariate coefficients `α_i`; never penalised.
    Covariates(usize),
    /// Within-type interaction `β_ii`.
    Intra(usize),
    /// Between-type interaction `β_ij`, `i < j`, shared by both orientations.
    Inter(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub kind: GroupKind,
    pub offset: usize,
    pub len: usize,
    pub penalized: bool,
}

impl Group {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }

    pub fn name(&self, labels: &[String]) -> String {
        match self.kind {
            GroupKind::Covariates(i) => format!("alpha[{}]", labels[i]),
            GroupKind::Intra(i) => format!("beta[{}]", labels[i]),
            GroupKind::Inter(i, j) => format!("beta[{}-{}]", labels[i], labels[j]),
        }
    }
}

/// Where each part of a type-`i` design row lives.
///
/// A row for a point of type `i` only touches `α_i`, `β_ii` and the `β_ij`; its
/// local layout is `[1, z_1..z_K, ω blocks for j = 0..p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeRow {
    pub n_covariates: usize,
    /// Local start (within the row) of the `(i, j)` ω block, if that pair interacts.
    pub pair_start: Vec<Option<usize>>,
    /// Global coefficient index for each local column.
    pub global: Vec<usize>,
}

impl TypeRow {
    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    /// Start of the ω part of the row.
    pub fn beta_start(&self) -> usize {
        self.n_covariates + 1
    }
}

/// Partition of the flat coefficient vector `θ = [α; β_intra; β_inter]` into groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    n_types: usize,
    groups: Vec<Group>,
    alpha_group: Vec<usize>,
    pair_group: Vec<Option<usize>>,
    rows: Vec<TypeRow>,
    len: usize,
}

impl Layout {
    fn build(n_types: usize, covariates: &[Vec<usize>], ranges: &[Vec<f64>]) -> Self {
        let p = n_types;
        let mut groups = Vec::new();
        let mut offset = 0;
        let mut alpha_group = Vec::with_capacity(p);
        for (i, cov) in covariates.iter().enumerate() {
            alpha_group.push(groups.len());
            groups.push(Group {
                kind: GroupKind::Covariates(i),
                offset,
                len: cov.len() + 1,
                penalized: false,
            });
            offset += cov.len() + 1;
        }
        let mut pair_group = vec![None; p * p];
        for i in 0..p {
            let k = ranges[i * p + i].len();
            if k > 0 {
                pair_group[i * p + i] = Some(groups.len());
                groups.push(Group {
                    kind: GroupKind::Intra(i),
                    offset,
                    len: k,
                    penalized: true,
                });
                offset += k;
            }
        }
        for i in 0..p {
            for j in i + 1..p {
                let k = ranges[i * p + j].len();
                if k > 0 {
                    pair_group[i * p + j] = Some(groups.len());
                    pair_group[j * p + i] = Some(groups.len());
                    groups.push(Group {
                        kind: GroupKind::Inter(i, j),
                        offset,
                        len: k,
                        penalized: true,
                    });
                    offset += k;
                }
            }
        }
        let rows = (0..p)
            .map(|i| {
                let a = &groups[alpha_group[i]];
                let mut global: Vec<usize> = a.range().collect();
                let mut pair_start = vec![None; p];
                for (j, start) in pair_start.iter_mut().enumerate() {
                    if let Some(g) = pair_group[i * p + j] {
                        *start = Some(global.len());
                        global.extend(groups[g].range());
                    }
                }
                TypeRow {
                    n_covariates: covariates[i].len(),
                    pair_start,
                    global,
                }
            })
            .collect();
        Self {
            n_types,
            groups,
            alpha_group,
            pair_group,
            rows,
            len: offset,
        }
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    /// Total coefficient count.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn alpha_group(&self, i: usize) -> usize {
        self.alpha_group[i]
    }

    /// Group of the (unordered) pair `(i, j)`; `i == j` gives the intra group.
    pub fn pair_group(&self, i: usize, j: usize) -> Option<usize> {
        self.pair_group[i * self.n_types + j]
    }

    pub fn type_row(&self, i: usize) -> &TypeRow {
        &self.rows[i]
    }

    /// Maps a flat index to `(group, position within group)`.
    pub fn locate(&self, flat: usize) -> Option<(usize, usize)> {
        self.groups
            .iter()
            .position(|g| g.range().contains(&flat))
            .map(|g| (g, flat - self.groups[g].offset))
    }

    pub fn flat_index(&self, group: usize, within: usize) -> Option<usize> {
        let g = self.groups.get(group)?;
        (within < g.len).then_some(g.offset + within)
    }

    pub fn slice<'a, T>(&self, theta: &'a [T], group: usize) -> &'a [T] {
        &theta[self.groups[group].range()]
    }

    /// Human-readable column names, e.g. `alpha[1].0`, `beta[1-2].k2`.
    pub fn column_names(&self, labels: &[String]) -> Vec<String> {
        let mut names = vec![String::new(); self.len];
        for g in &self.groups {
            let base = g.name(labels);
            for k in 0..g.len {
                names[g.offset + k] = match g.kind {
                    GroupKind::Covariates(_) => format!("{base}.{k}"),
                    _ => format!("{base}.k{}", k + 1),
                };
            }
        }
        names
    }
}

/// Model definition: interaction family, annulus ranges per pair, saturation
/// levels per ordered pair and the covariates each type uses.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    n_types: usize,
    family: Family,
    /// `p × p`, symmetric; empty vector means the pair does not interact.
    ranges: Vec<Vec<T>>,
    /// `p × p`, ordered: `saturation[i*p + j][k]` caps type-`j` neighbours of a type-`i` point.
    saturation: Vec<Vec<u32>>,
    covariates: Vec<Vec<usize>>,
    layout: Layout,
}

impl<T: Real> ModelSpec<T> {
    /// Every pair gets a range vector from `range_of(i, j)` (called with `i <= j`).
    pub fn from_fn<F>(n_types: usize, family: Family, mut range_of: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Vec<T>,
    {
        if n_types == 0 {
            return Err(Error::arg("model needs at least one type"));
        }
        let p = n_types;
        let mut ranges = vec![Vec::new(); p * p];
        for i in 0..p {
            for j in i..p {
                let r = range_of(i, j);
                validate_ranges(&r, i, j)?;
                ranges[i * p + j] = r.clone();
                ranges[j * p + i] = r;
            }
        }
        let saturation = ranges.iter().map(|r| vec![1u32; r.len()]).collect();
        let covariates = vec![Vec::new(); p];
        Ok(Self::assemble(n_types, family, ranges, saturation, covariates))
    }

    /// Same range vector for all intra pairs and another for all inter pairs.
    pub fn uniform(n_types: usize, family: Family, intra: Vec<T>, inter: Vec<T>) -> Result<Self> {
        Self::from_fn(n_types, family, |i, j| if i == j { intra.clone() } else { inter.clone() })
    }

    fn assemble(
        n_types: usize,
        family: Family,
        ranges: Vec<Vec<T>>,
        saturation: Vec<Vec<u32>>,
        covariates: Vec<Vec<usize>>,
    ) -> Self {
        let r64: Vec<Vec<f64>> = ranges
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64_lossy()).collect())
            .collect();
        let layout = Layout::build(n_types, &covariates, &r64);
        Self {
            n_types,
            family,
            ranges,
            saturation,
            covariates,
            layout,
        }
    }

    /// Sets every type's covariate list (indices into a [`Covariates`](super::Covariates) set).
    pub fn with_covariates(self, covariates: Vec<Vec<usize>>) -> Result<Self> {
        if covariates.len() != self.n_types {
            return Err(Error::arg("need one covariate list per type"));
        }
        Ok(Self::assemble(self.n_types, self.family, self.ranges, self.saturation, covariates))
    }

    /// All types use covariates `0..k`.
    pub fn with_shared_covariates(self, k: usize) -> Self {
        let p = self.n_types;
        self.with_covariates(vec![(0..k).collect(); p]).expect("one list per type")
    }

    pub fn with_saturation_constant(mut self, c: u32) -> Result<Self> {
        if c == 0 {
            return Err(Error::arg("saturation levels must be >= 1"));
        }
        for s in &mut self.saturation {
            s.iter_mut().for_each(|v| *v = c);
        }
        Ok(self)
    }

    /// Saturation `c_ijk` for the ordered pair (`i` centre, `j` neighbour).
    pub fn set_saturation(&mut self, i: usize, j: usize, levels: Vec<u32>) -> Result<()> {
        let p = self.n_types;
        if levels.len() != self.ranges[i * p + j].len() || levels.iter().any(|&c| c == 0) {
            return Err(Error::arg(format!(
                "saturation for ({i},{j}) needs {} levels, all >= 1",
                self.ranges[i * p + j].len()
            )));
        }
        self.saturation[i * p + j] = levels;
        Ok(())
    }

    /// Chooses each `c_ijk` as the `(1-ε)`-quantile of the Poisson neighbour count
    /// expected under independence, from the abundance `n_j` of the neighbour type.
    pub fn with_auto_saturation(mut self, counts: &[usize], window_area: T, epsilon: T) -> Result<Self> {
        let p = self.n_types;
        if counts.len() != p {
            return Err(Error::arg("need one count per type"));
        }
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(Error::arg("epsilon must lie in (0, 1)"));
        }
        for i in 0..p {
            for j in 0..p {
                let areas = annulus_areas(&self.ranges[i * p + j]);
                self.saturation[i * p + j] = areas
                    .into_iter()
                    .map(|a| saturation_auto(counts[j], a, window_area, epsilon))
                    .collect();
            }
        }
        Ok(self)
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn ranges(&self, i: usize, j: usize) -> &[T] {
        &self.ranges[i * self.n_types + j]
    }

    pub fn saturation(&self, i: usize, j: usize) -> &[u32] {
        &self.saturation[i * self.n_types + j]
    }

    pub fn covariates(&self, i: usize) -> &[usize] {
        &self.covariates[i]
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Largest interaction range over all pairs (0 when nothing interacts).
    pub fn max_range(&self) -> T {
        self.ranges
            .iter()
            .filter_map(|r| r.last().copied())
            .fold(T::zero(), T::max)
    }

    /// Largest range among pairs involving type `i`.
    pub fn max_range_for(&self, i: usize) -> T {
        (0..self.n_types)
            .filter_map(|j| self.ranges(i, j).last().copied())
            .fold(T::zero(), T::max)
    }
}

fn validate_ranges<T: Real>(r: &[T], i: usize, j: usize) -> Result<()> {
    if r.len() > super::omega::MAX_STEPS {
        return Err(Error::arg(format!(
            "pair ({}, {}) has {} steps, at most {} supported",
            i + 1,
            j + 1,
            r.len(),
            super::omega::MAX_STEPS
        )));
    }
    let mut prev = T::zero();
    for &v in r {
        if !(v > prev) || !v.is_finite() {
            return Err(Error::arg(format!(
                "range vector for pair ({}, {}) must be positive and strictly increasing",
                i + 1,
                j + 1
            )));
        }
        prev = v;
    }
    Ok(())
}

/// Areas `π(r_k² − r_{k−1}²)` of the annuli defined by a range vector.
pub(crate) fn annulus_areas<T: Real>(r: &[T]) -> Vec<T> {
    let pi = T::lit(std::f64::consts::PI);
    let mut prev = T::zero();
    r.iter()
        .map(|&v| {
            let a = pi * (v * v - prev * prev);
            prev = v;
            a
        })
        .collect()
}
