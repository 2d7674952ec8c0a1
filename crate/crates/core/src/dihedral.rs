//! Finite abelian groups, generalized dihedral groups `A ⋊ C₂` and actions of
//! them on finite abelian modules, used to check the "σ acts by −1" argument:
//! if `ρ(σ) = −id` and `στσ = τ⁻¹` then `ρ(τ)² = id`, so for odd `|A|` every
//! `ρ(τ)` is trivial.

use num_integer::Integer;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::ClassGroup;

/// Exhaustive checks are skipped above this group order.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000;

/// `⊕ ℤ/nᵢ`, elements as residue vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteAbelian {
    pub factors: Vec<u64>,
}

pub type Elem = Vec<u64>;

impl FiniteAbelian {
    /// Factors equal to 1 are dropped.
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::Precondition("cyclic factors must be positive".into()));
        }
        Ok(FiniteAbelian {
            factors: factors.into_iter().filter(|&n| n > 1).collect(),
        })
    }

    pub fn trivial() -> Self {
        FiniteAbelian { factors: vec![] }
    }

    pub fn from_class_group(cg: &ClassGroup) -> Self {
        FiniteAbelian {
            factors: cg.structure.iter().copied().filter(|&n| n > 1).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |l, &n| l.lcm(&n))
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.rank()]
    }

    /// The `i`-th standard generator.
    pub fn generator(&self, i: usize) -> Elem {
        let mut e = self.zero();
        e[i] = 1 % self.factors[i];
        e
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Elem {
        a.iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((x, y), n)| (x + y) % n)
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> Elem {
        a.iter().zip(&self.factors).map(|(x, n)| (n - x) % n).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, k: u64, a: &[u64]) -> Elem {
        a.iter()
            .zip(&self.factors)
            .map(|(x, n)| ((*x as u128 * k as u128) % *n as u128) as u64)
            .collect()
    }

    pub fn element_order(&self, a: &[u64]) -> u64 {
        a.iter()
            .zip(&self.factors)
            .fold(1, |l, (x, n)| l.lcm(&(n / n.gcd(x))))
    }

    /// All elements in lexicographic order of their residue vectors.
    pub fn elements(&self) -> Vec<Elem> {
        let mut out = vec![self.zero()];
        for (i, &n) in self.factors.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for e in &out {
                for v in 0..n {
                    let mut f = e.clone();
                    f[i] = v;
                    next.push(f);
                }
            }
            out = next;
        }
        out
    }

    pub fn is_odd(&self) -> bool {
        self.order() % 2 == 1
    }

    /// `a ↦ 2a` is a bijection; true exactly for odd order.
    pub fn squaring_is_bijective(&self) -> bool {
        let mut seen: Vec<Elem> = self.elements().par_iter().map(|a| self.scale(2, a)).collect();
        seen.sort();
        seen.dedup();
        seen.len() as u64 == self.order()
    }
}

/// `(a, reflection)`: `a` itself or `a·σ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DihedralElement {
    pub a: Elem,
    pub reflection: bool,
}

/// `A ⋊ C₂` with `σ a σ = −a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenDihedral {
    pub base: FiniteAbelian,
}

impl GenDihedral {
    pub fn order(&self) -> u64 {
        2 * self.base.order()
    }

    pub fn identity(&self) -> DihedralElement {
        DihedralElement {
            a: self.base.zero(),
            reflection: false,
        }
    }

    pub fn sigma(&self) -> DihedralElement {
        DihedralElement {
            a: self.base.zero(),
            reflection: true,
        }
    }

    pub fn rotation(&self, a: Elem) -> DihedralElement {
        DihedralElement { a, reflection: false }
    }

    /// `(a, ε)(b, δ) = (a + (−1)^ε b, ε + δ)`.
    pub fn mul(&self, g: &DihedralElement, h: &DihedralElement) -> DihedralElement {
        let a = if g.reflection {
            self.base.sub(&g.a, &h.a)
        } else {
            self.base.add(&g.a, &h.a)
        };
        DihedralElement {
            a,
            reflection: g.reflection ^ h.reflection,
        }
    }

    pub fn inverse(&self, g: &DihedralElement) -> DihedralElement {
        if g.reflection {
            g.clone()
        } else {
            self.rotation(self.base.neg(&g.a))
        }
    }

    pub fn elements(&self) -> Vec<DihedralElement> {
        let rots = self.base.elements();
        rots.iter()
            .map(|a| self.rotation(a.clone()))
            .chain(rots.iter().map(|a| DihedralElement {
                a: a.clone(),
                reflection: true,
            }))
            .collect()
    }

    /// Abelian exactly when `A` has exponent dividing 2.
    pub fn is_abelian(&self) -> bool {
        self.base.exponent() <= 2
    }

    /// `σ τ σ⁻¹ = τ⁻¹` for every rotation `τ`.
    pub fn inversion_relation_holds(&self) -> bool {
        let s = self.sigma();
        let si = self.inverse(&s);
        self.base.elements().par_iter().all(|a| {
            let t = self.rotation(a.clone());
            self.mul(&self.mul(&s, &t), &si) == self.inverse(&t)
        })
    }

    /// Every reflection `(a, 1)` squares to the identity.
    pub fn reflections_are_involutions(&self) -> bool {
        let id = self.identity();
        self.base.elements().par_iter().all(|a| {
            let r = DihedralElement {
                a: a.clone(),
                reflection: true,
            };
            self.mul(&r, &r) == id
        })
    }
}

pub fn make_gen_dihedral(a: &FiniteAbelian) -> Result<GenDihedral> {
    let g = GenDihedral { base: a.clone() };
    if a.order() <= EXHAUSTIVE_LIMIT && !g.inversion_relation_holds() {
        return Err(Error::Internal("inversion relation fails".into()));
    }
    Ok(g)
}

/// Elements `(a, 1)` of order at most 2: each lift of `σ` is an involution.
pub fn involution_lift_count(g: &GenDihedral) -> u64 {
    let id = g.identity();
    g.base
        .elements()
        .par_iter()
        .filter(|a| {
            let r = DihedralElement {
                a: (*a).clone(),
                reflection: true,
            };
            g.mul(&r, &r) == id
        })
        .count() as u64
}

/// Endomorphism of `⊕ ℤ/mⱼ`: column `j` is the image of the `j`-th generator,
/// entry `(i, j)` read modulo `mᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModMatrix {
    pub rows: Vec<Vec<u64>>,
}

impl ModMatrix {
    pub fn identity(m: &FiniteAbelian) -> Self {
        let r = m.rank();
        ModMatrix {
            rows: (0..r)
                .map(|i| (0..r).map(|j| u64::from(i == j) % m.factors[i]).collect())
                .collect(),
        }
    }

    pub fn minus_identity(m: &FiniteAbelian) -> Self {
        let r = m.rank();
        ModMatrix {
            rows: (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| if i == j { (m.factors[i] - 1) % m.factors[i] } else { 0 })
                        .collect()
                })
                .collect(),
        }
    }

    fn normalized(mut self, m: &FiniteAbelian) -> Self {
        for (i, row) in self.rows.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v %= m.factors[i];
            }
        }
        self
    }

    /// Well defined on the module: `mᵢ | mⱼ·T[i][j]`.
    pub fn is_homomorphism(&self, m: &FiniteAbelian) -> bool {
        let r = m.rank();
        self.rows.len() == r
            && self.rows.iter().enumerate().all(|(i, row)| {
                row.len() == r
                    && row
                        .iter()
                        .enumerate()
                        .all(|(j, &t)| (m.factors[j] as u128 * t as u128).is_multiple_of(m.factors[i] as u128))
            })
    }

    pub fn apply(&self, m: &FiniteAbelian, v: &[u64]) -> Elem {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n = m.factors[i] as u128;
                (row.iter().zip(v).map(|(&t, &x)| t as u128 * x as u128).sum::<u128>() % n) as u64
            })
            .collect()
    }

    pub fn compose(&self, m: &FiniteAbelian, other: &ModMatrix) -> ModMatrix {
        let r = m.rank();
        ModMatrix {
            rows: (0..r)
                .map(|i| {
                    let n = m.factors[i] as u128;
                    (0..r)
                        .map(|j| {
                            ((0..r)
                                .map(|k| self.rows[i][k] as u128 * other.rows[k][j] as u128)
                                .sum::<u128>()
                                % n) as u64
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn pow(&self, m: &FiniteAbelian, mut k: u64) -> ModMatrix {
        let mut acc = ModMatrix::identity(m);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(m, &base);
            }
            base = base.compose(m, &base);
            k >>= 1;
        }
        acc
    }

    /// Bijective, checked on every nonzero element.
    pub fn is_automorphism(&self, m: &FiniteAbelian) -> bool {
        self.is_homomorphism(m) && {
            let zero = m.zero();
            m.elements().par_iter().all(|v| *v == zero || self.apply(m, v) != zero)
        }
    }
}

/// `ρ: A ⋊ C₂ → Aut(M)` given by `ρ(σ)` and the images of the standard
/// generators of `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleAction {
    pub module: FiniteAbelian,
    pub sigma: ModMatrix,
    pub taus: Vec<ModMatrix>,
}

impl ModuleAction {
    /// `σ ↦ −id`, `A` acting trivially.
    pub fn minus_sigma_trivial(a: &FiniteAbelian, module: &FiniteAbelian) -> Self {
        ModuleAction {
            module: module.clone(),
            sigma: ModMatrix::minus_identity(module),
            taus: vec![ModMatrix::identity(module); a.rank()],
        }
    }

    pub fn rotation_image(&self, a: &[u64]) -> ModMatrix {
        let m = &self.module;
        a.iter()
            .zip(&self.taus)
            .fold(ModMatrix::identity(m), |acc, (&k, t)| acc.compose(m, &t.pow(m, k)))
    }

    pub fn image(&self, g: &DihedralElement) -> ModMatrix {
        let r = self.rotation_image(&g.a);
        if g.reflection {
            r.compose(&self.module, &self.sigma)
        } else {
            r
        }
    }

    /// Defining relations of `A ⋊ C₂` on the generators.
    pub fn check_relations(&self, a: &FiniteAbelian) -> Result<()> {
        let m = &self.module;
        let id = ModMatrix::identity(m);
        if self.taus.len() != a.rank() {
            return Err(Error::Precondition(format!(
                "{} generator images for a group of rank {}",
                self.taus.len(),
                a.rank()
            )));
        }
        for t in self.taus.iter().chain(std::iter::once(&self.sigma)) {
            if !t.is_automorphism(m) {
                return Err(Error::Precondition("generator image is not an automorphism".into()));
            }
        }
        if self.sigma.compose(m, &self.sigma) != id {
            return Err(Error::Precondition("ρ(σ)² ≠ id".into()));
        }
        for (i, t) in self.taus.iter().enumerate() {
            if t.pow(m, a.factors[i]) != id {
                return Err(Error::Precondition(format!("ρ(τ_{i}) has order not dividing {}", a.factors[i])));
            }
            let conj = self.sigma.compose(m, t).compose(m, &self.sigma);
            if conj.compose(m, t) != id {
                return Err(Error::Precondition(format!("ρ(σ)ρ(τ_{i})ρ(σ) ≠ ρ(τ_{i})⁻¹")));
            }
            for u in &self.taus[i + 1..] {
                if t.compose(m, u) != u.compose(m, t) {
                    return Err(Error::Precondition("generator images do not commute".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MinusOneCheck {
    pub tau_sq_trivial: bool,
    pub fixed_all: bool,
}

/// For odd `|A|` and `ρ(σ) = −id`: checks `ρ(τ²) = id` and `ρ(τ)m = m` for
/// every `τ ∈ A`, `m ∈ M`.
pub fn verify_minus_one_argument(a: &FiniteAbelian, act: &ModuleAction) -> Result<MinusOneCheck> {
    if !a.is_odd() {
        return Err(Error::Precondition(format!(
            "|A| = {} is even; the argument needs ⟨τ²⟩ = ⟨τ⟩, which holds only for odd order",
            a.order()
        )));
    }
    let m = &act.module;
    if act.sigma.clone().normalized(m) != ModMatrix::minus_identity(m) {
        return Err(Error::Precondition("ρ(σ) is not −id".into()));
    }
    act.check_relations(a)?;
    let id = ModMatrix::identity(m);
    let elems = a.elements();
    let module_elems = m.elements();
    let tau_sq_trivial = elems.par_iter().all(|t| {
        let r = act.rotation_image(t);
        r.compose(m, &r) == id
    });
    let fixed_all = elems.par_iter().all(|t| {
        let r = act.rotation_image(t);
        module_elems.iter().all(|v| r.apply(m, v) == *v)
    });
    Ok(MinusOneCheck {
        tau_sq_trivial,
        fixed_all,
    })
}

/// All homomorphism matrices of `M`, column by column, up to `budget`.
fn all_endomorphisms(m: &FiniteAbelian, budget: u64) -> Result<Vec<ModMatrix>> {
    let elements = m.elements();
    let columns: Vec<Vec<Elem>> = m
        .factors
        .iter()
        .map(|&mj| elements.iter().filter(|v| m.scale(mj, v) == m.zero()).cloned().collect())
        .collect();
    let total = columns.iter().try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64));
    match total {
        Some(t) if t <= budget => {}
        _ => {
            return Err(Error::Precondition(format!(
                "more than {budget} endomorphisms to enumerate"
            )))
        }
    }
    let r = m.rank();
    let mut out = vec![vec![]];
    for col in &columns {
        let mut next = Vec::with_capacity(out.len() * col.len());
        for prefix in &out {
            for c in col {
                let mut p: Vec<Elem> = prefix.clone();
                p.push(c.clone());
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out
        .into_iter()
        .map(|cols| ModMatrix {
            rows: (0..r).map(|i| (0..r).map(|j| cols[j][i]).collect()).collect(),
        })
        .collect())
}

/// Every action with `ρ(σ) = −id`, found by filtering all endomorphisms per
/// generator and then the commutation relations.
pub fn exhaustive_actions(a: &FiniteAbelian, m: &FiniteAbelian, budget: u64) -> Result<Vec<ModuleAction>> {
    let ends = all_endomorphisms(m, budget)?;
    let id = ModMatrix::identity(m);
    let sigma = ModMatrix::minus_identity(m);
    let per_gen: Vec<Vec<ModMatrix>> = a
        .factors
        .iter()
        .map(|&n| {
            ends.par_iter()
                .filter(|t| {
                    t.pow(m, n) == id
                        && sigma.compose(m, t).compose(m, &sigma).compose(m, t) == id
                        && t.is_automorphism(m)
                })
                .cloned()
                .collect()
        })
        .collect();
    let mut combos: Vec<Vec<ModMatrix>> = vec![vec![]];
    for cands in &per_gen {
        let mut next = vec![];
        for prefix in &combos {
            for t in cands {
                if prefix.iter().all(|u| u.compose(m, t) == t.compose(m, u)) {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    next.push(p);
                }
            }
        }
        combos = next;
    }
    Ok(combos
        .into_iter()
        .map(|taus| ModuleAction {
            module: m.clone(),
            sigma: sigma.clone(),
            taus,
        })
        .collect())
}

/// A random automorphism of `M` whose order divides `n`: a random
/// automorphism raised to the part of its order prime to `n`.
pub fn random_automorphism_of_order_dividing<G: Rng>(m: &FiniteAbelian, n: u64, rng: &mut G) -> ModMatrix {
    let r = m.rank();
    let id = ModMatrix::identity(m);
    loop {
        let t = ModMatrix {
            rows: (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| {
                            // entries allowed by mᵢ | mⱼ·t: multiples of mᵢ/gcd(mᵢ, mⱼ)
                            let step = m.factors[i] / m.factors[i].gcd(&m.factors[j]);
                            step * rng.gen_range(0..m.factors[i] / step)
                        })
                        .collect()
                })
                .collect(),
        };
        if !t.is_automorphism(m) {
            continue;
        }
        let mut k = 1u64;
        let mut p = t.clone();
        while p != id {
            p = p.compose(m, &t);
            k += 1;
        }
        let g = k.gcd(&n);
        return t.pow(m, k / g);
    }
}

/// A candidate action with `ρ(σ) = −id`: the generator images are powers of
/// one random automorphism, so they commute and have the right orders, but
/// the dihedral relation is left for [`ModuleAction::check_relations`].
pub fn random_candidate_action<G: Rng>(a: &FiniteAbelian, m: &FiniteAbelian, rng: &mut G) -> ModuleAction {
    let e = a.exponent();
    let t = random_automorphism_of_order_dividing(m, e, rng);
    let taus = a
        .factors
        .iter()
        .map(|&n| t.pow(m, (e / n) * rng.gen_range(0..n)))
        .collect();
    ModuleAction {
        module: m.clone(),
        sigma: ModMatrix::minus_identity(m),
        taus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(f: &[u64]) -> FiniteAbelian {
        FiniteAbelian::new(f.to_vec()).unwrap()
    }

    #[test]
    fn s3_from_z3() {
        let g = make_gen_dihedral(&ab(&[3])).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        let els = g.elements();
        let nonabelian = els.iter().any(|x| els.iter().any(|y| g.mul(x, y) != g.mul(y, x)));
        assert!(nonabelian);
        assert_eq!(involution_lift_count(&g), 3);
    }

    #[test]
    fn klein_and_25() {
        let g = make_gen_dihedral(&ab(&[2, 2])).unwrap();
        assert_eq!(g.order(), 8);
        assert!(g.is_abelian());
        let els = g.elements();
        assert!(els.iter().all(|x| els.iter().all(|y| g.mul(x, y) == g.mul(y, x))));
        assert!(els.iter().all(|x| g.mul(x, x) == g.identity()));
        let g = make_gen_dihedral(&ab(&[5, 5])).unwrap();
        assert_eq!(g.order(), 50);
        assert!(g.reflections_are_involutions());
        assert_eq!(involution_lift_count(&g), 25);
        assert_eq!(involution_lift_count(&make_gen_dihedral(&FiniteAbelian::trivial()).unwrap()), 1);
    }

    #[test]
    fn z3_on_f7_squared_only_trivial() {
        let a = ab(&[3]);
        let m = ab(&[7, 7]);
        let acts = exhaustive_actions(&a, &m, 1_000_000).unwrap();
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].taus[0], ModMatrix::identity(&m));
        let r = verify_minus_one_argument(&a, &acts[0]).unwrap();
        assert!(r.tau_sq_trivial && r.fixed_all);
    }

    #[test]
    fn trivial_and_even_groups() {
        let m = ab(&[5]);
        let t = FiniteAbelian::trivial();
        let r = verify_minus_one_argument(&t, &ModuleAction::minus_sigma_trivial(&t, &m)).unwrap();
        assert!(r.tau_sq_trivial && r.fixed_all);
        let a = ab(&[2]);
        let err = verify_minus_one_argument(&a, &ModuleAction::minus_sigma_trivial(&a, &m)).unwrap_err();
        assert!(matches!(err, Error::Precondition(msg) if msg.contains("even")));
    }

    #[test]
    fn rejects_bad_sigma_and_relation() {
        let a = ab(&[3]);
        let m = ab(&[7]);
        let mut act = ModuleAction::minus_sigma_trivial(&a, &m);
        act.sigma = ModMatrix::identity(&m);
        assert!(verify_minus_one_argument(&a, &act).is_err());
        // 2 has order 3 mod 7 but is not its own inverse
        let mut act = ModuleAction::minus_sigma_trivial(&a, &m);
        act.taus[0] = ModMatrix { rows: vec![vec![2]] };
        assert!(matches!(verify_minus_one_argument(&a, &act), Err(Error::Precondition(_))));
    }

    #[test]
    fn squaring_bijective_iff_odd() {
        assert!(ab(&[3, 15]).squaring_is_bijective());
        assert!(!ab(&[2, 3]).squaring_is_bijective());
    }

    #[test]
    fn mixed_module_homomorphisms() {
        // ℤ/2 ⊕ ℤ/4: the map e0 ↦ 2e1 is well defined, e1 ↦ e0 too
        let m = ab(&[2, 4]);
        let t = ModMatrix { rows: vec![vec![0, 1], vec![2, 0]] };
        assert!(t.is_homomorphism(&m));
        let bad = ModMatrix { rows: vec![vec![0, 0], vec![1, 0]] };
        assert!(!bad.is_homomorphism(&m));
    }
}
