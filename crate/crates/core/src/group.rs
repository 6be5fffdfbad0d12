//! Finite groups as multiplication tables, finite abelian groups as products
//! of cyclic factors, and their characters.
//!
//! Elements are always canonical indices `0..order`. Abelian tuples
//! `(a_1, ..., a_k)` are flattened in mixed radix with `a_1` most significant;
//! characters use the same encoding for their exponent tuples.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::report::{VerificationReport, Witness};
use crate::tolerance::Tolerances;
use crate::C64;

/// A finite group given by its Cayley table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
    label: String,
}

impl FiniteGroup {
    /// Validate a multiplication table (`table[g][h] = g*h`) and locate the
    /// identity and inverses.
    pub fn from_table(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotSquare {
                row: 0,
                len: 0,
                expected: 1,
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: r,
                    len: row.len(),
                    expected: n,
                });
            }
            if let Some((c, &v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(Error::EntryOutOfRange {
                    row: r,
                    col: c,
                    value: v,
                    order: n,
                });
            }
        }
        let table: Vec<usize> = rows.iter().flatten().copied().collect();
        let at = |a: usize, b: usize| table[a * n + b];

        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::NotAGroup {
                            axiom: "associativity",
                            a,
                            b,
                            c,
                        });
                    }
                }
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or(Error::NotAGroup {
                axiom: "identity",
                a: 0,
                b: 0,
                c: 0,
            })?;

        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or(Error::NotAGroup {
                    axiom: "inverse",
                    a: g,
                    b: identity,
                    c: identity,
                })?;
            inverses.push(inv);
        }

        // Implied by the axioms above; kept as a guard on the table itself.
        for g in 0..n {
            let row: BTreeSet<usize> = (0..n).map(|h| at(g, h)).collect();
            let col: BTreeSet<usize> = (0..n).map(|h| at(h, g)).collect();
            if row.len() != n || col.len() != n {
                return Err(Error::NotAGroup {
                    axiom: "latin square",
                    a: g,
                    b: g,
                    c: g,
                });
            }
        }

        Ok(Self {
            order: n,
            table,
            identity,
            inverses,
            label: format!("table(order {n})"),
        })
    }

    pub fn trivial() -> Self {
        Self::from_table(&[vec![0]]).expect("trivial table is a group")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inverses
    }

    /// Elements with the identity first, then the rest in index order.
    pub fn elements_identity_first(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.identity).chain((0..self.order).filter(move |&g| g != self.identity))
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.op(a, b) == self.op(b, a)))
    }

    pub fn check_element(&self, g: usize) -> Result<()> {
        if g < self.order {
            Ok(())
        } else {
            Err(Error::InvalidElement {
                index: g,
                order: self.order,
            })
        }
    }
}

/// Closure of `gens` under the group operation. Always contains the identity.
pub fn subgroup_from_generators(group: &FiniteGroup, gens: &[usize]) -> Result<BTreeSet<usize>> {
    for &g in gens {
        group.check_element(g)?;
    }
    let mut members = BTreeSet::from([group.identity()]);
    let mut frontier = vec![group.identity()];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = group.op(x, g);
            if members.insert(y) {
                frontier.push(y);
            }
        }
    }
    // Finite: closure under products already contains inverses.
    assert_eq!(
        group.order() % members.len(),
        0,
        "subgroup order must divide group order"
    );
    Ok(members)
}

/// `Z_{n_1} x ... x Z_{n_k}` with componentwise addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    orders: Vec<usize>,
    group: FiniteGroup,
    // exponent of the common root of unity: values are exp(2 pi i m / period)
    period: usize,
    // phase numerators, row = character, column = element
    phases: Vec<usize>,
}

impl AbelianGroup {
    pub fn new(orders: &[usize]) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::EmptyOrders);
        }
        if let Some(index) = orders.iter().position(|&n| n == 0) {
            return Err(Error::ZeroOrder { index });
        }
        let n: usize = orders.iter().product();
        let decode = |mut idx: usize| {
            let mut digits = vec![0; orders.len()];
            for (d, &m) in digits.iter_mut().zip(orders).rev() {
                *d = idx % m;
                idx /= m;
            }
            digits
        };
        let encode = |digits: &[usize]| digits.iter().zip(orders).fold(0, |acc, (&d, &m)| acc * m + d);

        let rows: Vec<Vec<usize>> = (0..n)
            .map(|a| {
                let da = decode(a);
                (0..n)
                    .map(|b| {
                        let db = decode(b);
                        let sum: Vec<usize> = da.iter().zip(&db).zip(orders).map(|((x, y), m)| (x + y) % m).collect();
                        encode(&sum)
                    })
                    .collect()
            })
            .collect();
        let label = orders.iter().map(|m| format!("Z{m}")).collect::<Vec<_>>().join("x");
        let group = FiniteGroup::from_table(&rows)?.with_label(label);

        let period = orders.iter().fold(1, |l, &m| lcm(l, m));
        let mut phases = vec![0; n * n];
        for c in 0..n {
            let dc = decode(c);
            for g in 0..n {
                let dg = decode(g);
                let num: usize = dc
                    .iter()
                    .zip(&dg)
                    .zip(orders)
                    .map(|((x, y), m)| (x * y % m) * (period / m))
                    .sum();
                phases[c * n + g] = num % period;
            }
        }

        Ok(Self {
            orders: orders.to_vec(),
            group,
            period,
            phases,
        })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn label(&self) -> &str {
        self.group.label()
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.group.op(a, b)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.group.inv(a)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut digits = vec![0; self.orders.len()];
        for (d, &m) in digits.iter_mut().zip(&self.orders).rev() {
            *d = idx % m;
            idx /= m;
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.orders).fold(0, |acc, (&d, &m)| acc * m + d % m)
    }

    /// Phase numerator `m` with `xi_c(g) = exp(2 pi i m / period)`.
    #[inline]
    pub fn phase(&self, c: usize, g: usize) -> usize {
        self.phases[c * self.order() + g]
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// `xi_c(g)`, exact at multiples of a quarter turn.
    #[inline]
    pub fn char_value(&self, c: usize, g: usize) -> C64 {
        root_of_unity(self.phase(c, g), self.period)
    }

    pub fn character(&self, c: usize) -> Character {
        Character {
            index: c,
            exponents: self.decode(c),
            values: (0..self.order()).map(|g| self.char_value(c, g)).collect(),
        }
    }

    /// All `o(G)` characters, indexed like the elements.
    pub fn characters(&self) -> Vec<Character> {
        (0..self.order()).map(|c| self.character(c)).collect()
    }

    /// Index of the trivial character `1_G`.
    pub fn trivial_character(&self) -> usize {
        0
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// `exp(2 pi i num / den)`, snapping quarter turns to exact values.
pub fn root_of_unity(num: usize, den: usize) -> C64 {
    let num = num % den;
    if (4 * num).is_multiple_of(den) {
        match 4 * num / den {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, TAU * num as f64 / den as f64)
    }
}

/// A character `xi(g) = exp(2 pi i sum_j c_j a_j / n_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Character {
    pub index: usize,
    pub exponents: Vec<usize>,
    values: Vec<C64>,
}

impl Character {
    pub fn eval(&self, g: usize) -> C64 {
        self.values[g]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&c| c == 0)
    }
}

/// Both orthogonality relations: averages over elements for every character
/// pair, and averages over characters for every element pair.
pub fn check_character_orthogonality(g: &AbelianGroup, tol: &Tolerances) -> VerificationReport {
    let n = g.order();
    let mut report = VerificationReport::new("character-orthogonality", g.label(), *tol);
    let nf = n as f64;

    let mut worst_chars = (0.0, 0, 0);
    for a in 0..n {
        for b in 0..n {
            let s: C64 = (0..n)
                .map(|x| g.char_value(a, x) * g.char_value(b, x).conj())
                .sum::<C64>()
                / nf;
            let target = if a == b { 1.0 } else { 0.0 };
            let dev = (s - target).norm();
            if dev > worst_chars.0 {
                worst_chars = (dev, a, b);
            }
        }
    }

    let mut worst_elems = (0.0, 0, 0);
    for x in 0..n {
        for y in 0..n {
            let s: C64 = (0..n)
                .map(|c| g.char_value(c, x) * g.char_value(c, y).conj())
                .sum::<C64>()
                / nf;
            let target = if x == y { 1.0 } else { 0.0 };
            let dev = (s - target).norm();
            if dev > worst_elems.0 {
                worst_elems = (dev, x, y);
            }
        }
    }

    let thr = tol.residual;
    if !report.bound("character-pairs", worst_chars.0, thr) {
        report.witness("character-pair", Witness::Indices(vec![worst_chars.1, worst_chars.2]));
    }
    if !report.bound("element-pairs", worst_elems.0, thr) {
        report.witness("element-pair", Witness::Indices(vec![worst_elems.1, worst_elems.2]));
    }
    report.witness("characters", Witness::Count(n));
    report
}
