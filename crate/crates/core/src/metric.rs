//! Finite metric site spaces and decay profiles.
//!
//! A [`SiteSpace`] is the stage on which everything lives: an ordered
//! finite vertex set with a metric and per-site Hilbert dimensions. A
//! [`DecayProfile`] is a nonincreasing positive function `F` of distance
//! together with an exponential reweighting rate `a`, `F_a(r) = e^{-ar} F(r)`,
//! and the two regularity constants that gate every bound downstream: the
//! pair-sum norm `|F_a|` and the convolution constant `C_a`.

use crate::error::{Error, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Sites are indices into the space's vertex list.
pub type Site = usize;

/// Finite vertex set with a metric and per-site local dimensions.
#[derive(Debug, Clone)]
pub struct SiteSpace {
    labels: Vec<String>,
    distance: Array2<f64>,
    local_dims: Vec<usize>,
}

impl SiteSpace {
    /// Build a space from an explicit distance table, validating the metric
    /// axioms and `local_dims >= 2` on every site.
    pub fn new(labels: Vec<String>, distance: Array2<f64>, local_dims: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if distance.shape() != [n, n] {
            return Err(Error::Config(format!(
                "distance table is {:?}, expected [{n}, {n}]",
                distance.shape()
            )));
        }
        if local_dims.len() != n {
            return Err(Error::Config(format!(
                "{} local dimensions for {n} sites",
                local_dims.len()
            )));
        }
        for (x, &d) in local_dims.iter().enumerate() {
            if d < 2 {
                return Err(Error::Config(format!(
                    "site {x} has local dimension {d}; need at least 2"
                )));
            }
        }
        for x in 0..n {
            for y in 0..n {
                let d = distance[[x, y]];
                if d < 0.0 || !d.is_finite() {
                    return Err(Error::Config(format!("d({x},{y}) = {d} is not a distance")));
                }
                if (d == 0.0) != (x == y) {
                    return Err(Error::Config(format!(
                        "d({x},{y}) = {d} violates d = 0 iff equal"
                    )));
                }
                if d != distance[[y, x]] {
                    return Err(Error::Config(format!("distance table asymmetric at ({x},{y})")));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let lhs = distance[[x, y]];
                    let rhs = distance[[x, z]] + distance[[z, y]];
                    if lhs > rhs + 1e-12 * (1.0 + rhs) {
                        return Err(Error::Config(format!(
                            "triangle inequality fails: d({x},{y}) = {lhs} > {rhs}"
                        )));
                    }
                }
            }
        }
        Ok(SiteSpace {
            labels,
            distance,
            local_dims,
        })
    }

    /// Graph-distance space over unit edges.
    pub fn from_edges(
        labels: Vec<String>,
        edges: &[(Site, Site)],
        local_dims: Vec<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        for &(x, y) in edges {
            if x >= n || y >= n || x == y {
                return Err(Error::Config(format!("bad edge ({x},{y}) on {n} sites")));
            }
            adj[x].push(y);
            adj[y].push(x);
        }
        let mut distance = Array2::from_elem((n, n), f64::INFINITY);
        for start in 0..n {
            // BFS
            let mut queue = std::collections::VecDeque::new();
            distance[[start, start]] = 0.0;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                let dv = distance[[start, v]];
                for &w in &adj[v] {
                    if distance[[start, w]].is_infinite() {
                        distance[[start, w]] = dv + 1.0;
                        queue.push_back(w);
                    }
                }
            }
        }
        if distance.iter().any(|d| d.is_infinite()) {
            return Err(Error::Config("geometry graph is disconnected".into()));
        }
        SiteSpace::new(labels, distance, local_dims)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, x: Site) -> &str {
        &self.labels[x]
    }

    pub fn distance(&self, x: Site, y: Site) -> f64 {
        self.distance[[x, y]]
    }

    pub fn local_dim(&self, x: Site) -> usize {
        self.local_dims[x]
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    /// All sites, in vertex order.
    pub fn sites(&self) -> Vec<Site> {
        (0..self.len()).collect()
    }
}

/// Minimum distance between two nonempty site sets.
pub fn set_distance(space: &SiteSpace, x_set: &[Site], y_set: &[Site]) -> Result<f64> {
    if x_set.is_empty() || y_set.is_empty() {
        return Err(Error::EmptySet("set_distance"));
    }
    let mut best = f64::INFINITY;
    for &x in x_set {
        for &y in y_set {
            best = best.min(space.distance(x, y));
        }
    }
    Ok(best)
}

/// Lattice geometries supported by the presets. The horizontal direction is
/// the first coordinate; rings and torus rows are periodic horizontally and
/// open in the perpendicular direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    /// Open chain of `length` sites.
    Path { length: usize },
    /// Periodic chain of `length` sites.
    Ring { length: usize },
    /// Open `length x width` rectangle.
    Grid { length: usize, width: usize },
    /// `length x width` strip, periodic horizontally, open vertically.
    TorusRow { length: usize, width: usize },
}

impl Geometry {
    /// Horizontal extent L.
    pub fn length(&self) -> usize {
        match *self {
            Geometry::Path { length } | Geometry::Ring { length } => length,
            Geometry::Grid { length, .. } | Geometry::TorusRow { length, .. } => length,
        }
    }

    /// Perpendicular extent |V_perp| (1 for chains and rings).
    pub fn width(&self) -> usize {
        match *self {
            Geometry::Path { .. } | Geometry::Ring { .. } => 1,
            Geometry::Grid { width, .. } | Geometry::TorusRow { width, .. } => width,
        }
    }

    pub fn horizontal_periodic(&self) -> bool {
        matches!(self, Geometry::Ring { .. } | Geometry::TorusRow { .. })
    }

    pub fn site_count(&self) -> usize {
        self.length() * self.width()
    }

    /// Site index of column `c`, perpendicular position `v`.
    /// Sites are ordered column-major: `index = c * width + v`.
    pub fn site(&self, c: usize, v: usize) -> Site {
        c * self.width() + v
    }

    /// `(column, perp)` coordinates of a site.
    pub fn coords(&self, s: Site) -> (usize, usize) {
        (s / self.width(), s % self.width())
    }

    pub fn label_of(&self, s: Site) -> String {
        if self.width() == 1 {
            format!("{}", s)
        } else {
            let (c, v) = self.coords(s);
            format!("({c},{v})")
        }
    }

    /// Nearest-neighbor edges. Horizontal wrap bonds are included for
    /// periodic geometries; each edge appears once, ordered `(x, y)` with
    /// `y` the right/upper neighbor.
    pub fn edges(&self) -> Vec<(Site, Site)> {
        let (l, w) = (self.length(), self.width());
        let mut edges = Vec::new();
        for c in 0..l {
            for v in 0..w {
                // horizontal bond c -> c+1
                if c + 1 < l {
                    edges.push((self.site(c, v), self.site(c + 1, v)));
                } else if self.horizontal_periodic() && l > 2 {
                    edges.push((self.site(c, v), self.site(0, v)));
                }
                // vertical bond v -> v+1 (open)
                if v + 1 < w {
                    edges.push((self.site(c, v), self.site(c, v + 1)));
                }
            }
        }
        // L = 2 periodic: the wrap bond coincides with the open bond, keep one.
        if self.horizontal_periodic() && l == 2 {
            // already covered by c+1 < l above; nothing extra
        }
        edges
    }

    /// Horizontal bonds leaving column `c`, i.e. bonds `(c,v)-(c+1 mod L, v)`.
    pub fn horizontal_bonds_at(&self, c: usize) -> Vec<(Site, Site)> {
        let (l, w) = (self.length(), self.width());
        let cn = (c + 1) % l;
        if c + 1 >= l && !self.horizontal_periodic() {
            return Vec::new();
        }
        (0..w).map(|v| (self.site(c, v), self.site(cn, v))).collect()
    }

    /// Sites of column `c`.
    pub fn column(&self, c: usize) -> Vec<Site> {
        (0..self.width()).map(|v| self.site(c, v)).collect()
    }

    /// The site space with uniform local dimension.
    pub fn site_space(&self, local_dim: usize) -> Result<SiteSpace> {
        let n = self.site_count();
        let labels = (0..n).map(|s| self.label_of(s)).collect();
        SiteSpace::from_edges(labels, &self.edges(), vec![local_dim; n])
    }
}

/// The base function F of a decay profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `F(r) = (1 + r)^{-power}`. `power = 0` gives the constant profile.
    InversePower { power: f64 },
    /// `F(r) = e^{-decay r}`.
    Exponential { decay: f64 },
}

impl ProfileKind {
    pub fn base(&self, r: f64) -> f64 {
        match *self {
            ProfileKind::InversePower { power } => (1.0 + r).powf(-power),
            ProfileKind::Exponential { decay } => (-decay * r).exp(),
        }
    }
}

/// A decay profile `F_a(r) = e^{-ar} F(r)` with its cached regularity
/// constants on a fixed space.
///
/// The cached values are computed exhaustively at construction; they are
/// properties of (F, a, space) and deliberately do not change when a bound
/// is later evaluated on a sub-volume, which is what makes the analytic
/// sides of all checks volume-independent.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    kind: ProfileKind,
    rate: f64,
    cached_f_norm: f64,
    cached_conv: f64,
}

impl DecayProfile {
    pub fn new(kind: ProfileKind, rate: f64, space: &SiteSpace) -> Result<Self> {
        if rate < 0.0 {
            return Err(Error::Config(format!("decay rate a = {rate} must be >= 0")));
        }
        if let ProfileKind::InversePower { power } = kind {
            if power < 0.0 {
                return Err(Error::Config(format!("power {power} must be >= 0")));
            }
        }
        if let ProfileKind::Exponential { decay } = kind {
            if decay < 0.0 {
                return Err(Error::Config(format!("decay {decay} must be >= 0")));
            }
        }
        let mut profile = DecayProfile {
            kind,
            rate,
            cached_f_norm: 0.0,
            cached_conv: 0.0,
        };
        profile.cached_f_norm = pair_sum_norm(space, &profile);
        profile.cached_conv = convolution_constant(space, &profile)?;
        Ok(profile)
    }

    /// The same base function at a different reweighting rate, with fresh
    /// caches on the same space.
    pub fn with_rate(&self, rate: f64, space: &SiteSpace) -> Result<Self> {
        DecayProfile::new(self.kind, rate, space)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `F(r)`, the unreweighted base function.
    pub fn base(&self, r: f64) -> f64 {
        self.kind.base(r)
    }

    /// `F_a(r) = e^{-ar} F(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        (-self.rate * r).exp() * self.base(r)
    }

    /// Cached pair-sum norm `sup_x sum_y F_a(d(x,y))`.
    pub fn f_norm(&self) -> f64 {
        self.cached_f_norm
    }

    /// Cached convolution constant `C_a`.
    pub fn conv_constant(&self) -> f64 {
        self.cached_conv
    }
}

/// `sup_x sum_y F_a(d(x,y))`, the uniform integrability norm, by exhaustive
/// summation.
pub fn pair_sum_norm(space: &SiteSpace, profile: &DecayProfile) -> f64 {
    let n = space.len();
    let mut sup = 0.0f64;
    for x in 0..n {
        let mut sum = 0.0;
        for y in 0..n {
            sum += profile.eval(space.distance(x, y));
        }
        sup = sup.max(sum);
    }
    sup
}

/// `sup_{x,y} sum_z F_a(d(x,z)) F_a(d(z,y)) / F_a(d(x,y))` by exhaustive
/// summation over all triples.
pub fn convolution_constant(space: &SiteSpace, profile: &DecayProfile) -> Result<f64> {
    let n = space.len();
    let mut sup = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let denom = profile.eval(space.distance(x, y));
            if denom <= 0.0 {
                return Err(Error::DivisionByZeroProfile {
                    distance: space.distance(x, y),
                });
            }
            let mut sum = 0.0;
            for z in 0..n {
                sum += profile.eval(space.distance(x, z)) * profile.eval(space.distance(z, y));
            }
            sup = sup.max(sum / denom);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_profile(space: &SiteSpace) -> DecayProfile {
        DecayProfile::new(ProfileKind::InversePower { power: 0.0 }, 0.0, space).unwrap()
    }

    #[test]
    fn path_three_sites_constant_profile() {
        let space = Geometry::Path { length: 3 }.site_space(2).unwrap();
        let p = unit_profile(&space);
        assert_eq!(pair_sum_norm(&space, &p), 3.0);
    }

    #[test]
    fn reweighting_never_increases_the_norm() {
        let space = Geometry::Ring { length: 8 }.site_space(2).unwrap();
        let p0 = DecayProfile::new(ProfileKind::InversePower { power: 2.0 }, 0.0, &space).unwrap();
        let p1 = p0.with_rate(1.0, &space).unwrap();
        assert!(p1.f_norm() <= p0.f_norm());
        assert!(p1.conv_constant() <= p0.conv_constant());
    }

    #[test]
    fn ring_eight_inverse_square_norm() {
        // Independent oracle: plain double loop over the known ring metric.
        let space = Geometry::Ring { length: 8 }.site_space(2).unwrap();
        let p = DecayProfile::new(ProfileKind::InversePower { power: 2.0 }, 0.0, &space).unwrap();
        let mut expect = 0.0f64;
        for x in 0..8usize {
            let mut sum = 0.0;
            for y in 0..8usize {
                let d = (x as i64 - y as i64).rem_euclid(8).min((y as i64 - x as i64).rem_euclid(8)) as f64;
                sum += (1.0 + d).powi(-2);
            }
            expect = expect.max(sum);
        }
        // Frozen from the oracle: 1 + 2/4 + 2/9 + 2/16 + 1/25.
        assert!((expect - 1.886_388_888_888_889).abs() < 1e-15);
        assert!((pair_sum_norm(&space, &p) - expect).abs() < 1e-15);
    }

    #[test]
    fn complete_graph_convolution_constant() {
        // Complete graph on n vertices, F = 1, a = 0: every summand is 1.
        let n = 5;
        let mut dist = Array2::from_elem((n, n), 1.0);
        for i in 0..n {
            dist[[i, i]] = 0.0;
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        let space = SiteSpace::new(labels, dist, vec![2; n]).unwrap();
        let p = unit_profile(&space);
        assert_eq!(convolution_constant(&space, &p).unwrap(), n as f64);
    }

    #[test]
    fn path_five_inverse_square_convolution() {
        // Independent oracle: exhaustive triple loop on the path metric.
        let space = Geometry::Path { length: 5 }.site_space(2).unwrap();
        let p = DecayProfile::new(ProfileKind::InversePower { power: 2.0 }, 0.0, &space).unwrap();
        let f = |r: f64| (1.0 + r).powi(-2);
        let mut expect = 0.0f64;
        for x in 0..5usize {
            for y in 0..5usize {
                let mut sum = 0.0;
                for z in 0..5usize {
                    let dxz = (x as f64 - z as f64).abs();
                    let dzy = (z as f64 - y as f64).abs();
                    sum += f(dxz) * f(dzy);
                }
                expect = expect.max(sum / f((x as f64 - y as f64).abs()));
            }
        }
        assert!((convolution_constant(&space, &p).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn cached_constants_reproduce_recomputation() {
        let space = Geometry::TorusRow { length: 4, width: 3 }.site_space(2).unwrap();
        let p = DecayProfile::new(ProfileKind::Exponential { decay: 0.7 }, 0.5, &space).unwrap();
        assert_eq!(p.f_norm(), pair_sum_norm(&space, &p));
        assert_eq!(p.conv_constant(), convolution_constant(&space, &p).unwrap());
    }

    #[test]
    fn set_distance_cases() {
        let space = Geometry::Path { length: 6 }.site_space(2).unwrap();
        assert_eq!(set_distance(&space, &[2], &[2]).unwrap(), 0.0);
        assert_eq!(set_distance(&space, &[1], &[4]).unwrap(), 3.0);
        assert_eq!(set_distance(&space, &[0, 1, 2], &[2, 5]).unwrap(), 0.0);
        assert!(matches!(
            set_distance(&space, &[], &[1]),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn grid_and_torus_row_edge_counts() {
        // 4x3 open grid: 3*3 horizontal + 4*2 vertical = 17.
        assert_eq!(Geometry::Grid { length: 4, width: 3 }.edges().len(), 17);
        // 4x3 torus row: 4*3 horizontal (with wrap) + 4*2 vertical = 20.
        assert_eq!(Geometry::TorusRow { length: 4, width: 3 }.edges().len(), 20);
        // Ring of 8: 8 bonds.
        assert_eq!(Geometry::Ring { length: 8 }.edges().len(), 8);
        // Ring of 2 degenerates to a single bond.
        assert_eq!(Geometry::Ring { length: 2 }.edges().len(), 1);
    }

    #[test]
    fn metric_validation_rejects_bad_tables() {
        let labels: Vec<String> = (0..2).map(|i: usize| i.to_string()).collect();
        let mut dist = Array2::zeros((2, 2));
        dist[[0, 1]] = 1.0;
        // asymmetric
        assert!(SiteSpace::new(labels.clone(), dist, vec![2, 2]).is_err());
        let mut dist = Array2::zeros((2, 2));
        dist[[0, 1]] = 1.0;
        dist[[1, 0]] = 1.0;
        // local dim below 2
        assert!(SiteSpace::new(labels, dist, vec![2, 1]).is_err());
    }

    proptest! {
        #[test]
        fn pair_sum_norm_monotone_in_rate(a1 in 0.0..2.0f64, a2 in 0.0..2.0f64) {
            let space = Geometry::Ring { length: 6 }.site_space(2).unwrap();
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let plo = DecayProfile::new(ProfileKind::InversePower { power: 2.0 }, lo, &space).unwrap();
            let phi = plo.with_rate(hi, &space).unwrap();
            prop_assert!(phi.f_norm() <= plo.f_norm() + 1e-12);
        }

        #[test]
        fn convolution_constant_dominates_f_at_zero(a in 0.0..2.0f64, p in 0.0..3.0f64) {
            let space = Geometry::Path { length: 7 }.site_space(2).unwrap();
            let prof = DecayProfile::new(ProfileKind::InversePower { power: p }, a, &space).unwrap();
            // C_a >= F_a(0) > 0: the z = x = y term alone contributes F_a(0).
            prop_assert!(prof.conv_constant() >= prof.eval(0.0) - 1e-12);
            prop_assert!(prof.conv_constant() > 0.0);
        }
    }
}
