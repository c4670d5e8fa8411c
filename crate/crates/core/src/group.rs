//! Finite groups stored as Cayley tables.
//!
//! Every group keeps its identity at id 0, so the trace of a group-ring
//! element is a single index read. Tables are validated on construction:
//! Latin-square property, identity law, inverses, and associativity
//! (exhaustive up to order [`EXHAUSTIVE_ASSOC_LIMIT`], sampled above).

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest order for which associativity is checked on every triple.
pub const EXHAUSTIVE_ASSOC_LIMIT: usize = 64;

/// Index of an element inside a [`FiniteGroup`]. Id 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElementId(pub usize);

impl GroupElementId {
    pub const IDENTITY: GroupElementId = GroupElementId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for GroupElementId {
    fn from(i: usize) -> Self {
        GroupElementId(i)
    }
}

impl fmt::Display for GroupElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    /// Row-major `order × order` table; `cayley[i * order + j]` is the id of gᵢgⱼ.
    cayley: Vec<usize>,
    inverse: Vec<usize>,
    names: Vec<String>,
    /// Spec string that rebuilds this group via [`parse_group_spec`].
    label: String,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("label", &self.label)
            .field("order", &self.order)
            .finish()
    }
}

impl FiniteGroup {
    /// Builds and validates a group from an explicit row-major table.
    pub fn from_table(table: Vec<Vec<usize>>, names: Option<Vec<String>>, label: impl Into<String>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::GroupAxiom {
                axiom: "nonempty",
                detail: "a group needs at least one element".into(),
            });
        }
        let mut cayley = Vec::with_capacity(order * order);
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(Error::GroupAxiom {
                    axiom: "square table",
                    detail: format!("row {i} has {} entries, expected {order}", row.len()),
                });
            }
            cayley.extend_from_slice(row);
        }
        let names = match names {
            Some(n) if n.len() != order => {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: n.len(),
                })
            }
            Some(n) => n,
            None => (0..order).map(|i| i.to_string()).collect(),
        };
        Self::from_flat(order, cayley, names, label.into())
    }

    fn from_flat(order: usize, cayley: Vec<usize>, names: Vec<String>, label: String) -> Result<Self> {
        validate_latin(order, &cayley)?;
        validate_identity(order, &cayley)?;
        let inverse = find_inverses(order, &cayley)?;
        validate_associativity(order, &cayley)?;
        Ok(FiniteGroup {
            order,
            cayley,
            inverse,
            names,
            label,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> GroupElementId {
        GroupElementId::IDENTITY
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElementId> + '_ {
        (0..self.order).map(GroupElementId)
    }

    /// Id of `a * b`.
    #[inline]
    pub fn mul(&self, a: GroupElementId, b: GroupElementId) -> GroupElementId {
        GroupElementId(self.cayley[a.0 * self.order + b.0])
    }

    #[inline]
    pub(crate) fn mul_idx(&self, a: usize, b: usize) -> usize {
        self.cayley[a * self.order + b]
    }

    #[inline]
    pub fn inverse(&self, a: GroupElementId) -> GroupElementId {
        GroupElementId(self.inverse[a.0])
    }

    #[inline]
    pub(crate) fn inverse_idx(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `a^n` for any integer `n`, negative powers through the inverse.
    pub fn pow(&self, a: GroupElementId, n: i64) -> GroupElementId {
        let base = if n < 0 { self.inverse(a) } else { a };
        let mut acc = self.identity();
        for _ in 0..n.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    /// Smallest k ≥ 1 with a^k = e.
    pub fn element_order(&self, a: GroupElementId) -> usize {
        let mut k = 1;
        let mut acc = a;
        while acc != self.identity() {
            acc = self.mul(acc, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.mul_idx(i, j) == self.mul_idx(j, i)))
    }

    pub fn cayley_row(&self, a: GroupElementId) -> &[usize] {
        &self.cayley[a.0 * self.order..(a.0 + 1) * self.order]
    }

    pub fn cayley_table(&self) -> Vec<Vec<usize>> {
        self.cayley.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse
    }

    pub fn name(&self, a: GroupElementId) -> &str {
        &self.names[a.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Canonical spec string for this group (the inverse of [`parse_group_spec`]).
    pub fn render(&self) -> &str {
        &self.label
    }

    pub fn check_id(&self, a: GroupElementId) -> Result<()> {
        if a.0 < self.order {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "element id {} out of range for group of order {}",
                a.0, self.order
            )))
        }
    }

    /// Same order and Cayley table (names and labels may differ).
    pub fn same_structure(&self, other: &FiniteGroup) -> bool {
        self.order == other.order && self.cayley == other.cayley
    }

    pub fn find_by_name(&self, name: &str) -> Option<GroupElementId> {
        self.names.iter().position(|n| n == name).map(GroupElementId)
    }

    /// Serializes the group in the explicit Cayley-table file format.
    pub fn to_table_text(&self) -> String {
        let mut out = format!("|G| = {}\n", self.order);
        out.push_str("names:");
        for n in &self.names {
            out.push(' ');
            out.push_str(n);
        }
        out.push('\n');
        for row in self.cayley.chunks(self.order) {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn validate_latin(order: usize, cayley: &[usize]) -> Result<()> {
    if let Some(pos) = cayley.iter().position(|&v| v >= order) {
        return Err(Error::GroupAxiom {
            axiom: "closure",
            detail: format!(
                "entry ({}, {}) = {} is not an element id",
                pos / order,
                pos % order,
                cayley[pos]
            ),
        });
    }
    let mut seen = vec![false; order];
    for i in 0..order {
        seen.iter_mut().for_each(|s| *s = false);
        for j in 0..order {
            let v = cayley[i * order + j];
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::GroupAxiom {
                    axiom: "latin square",
                    detail: format!("row {i} repeats element {v}"),
                });
            }
        }
    }
    for j in 0..order {
        seen.iter_mut().for_each(|s| *s = false);
        for i in 0..order {
            let v = cayley[i * order + j];
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::GroupAxiom {
                    axiom: "latin square",
                    detail: format!("column {j} repeats element {v}"),
                });
            }
        }
    }
    Ok(())
}

fn validate_identity(order: usize, cayley: &[usize]) -> Result<()> {
    for j in 0..order {
        if cayley[j] != j || cayley[j * order] != j {
            return Err(Error::GroupAxiom {
                axiom: "identity",
                detail: format!("element 0 is not a two-sided identity (fails at {j})"),
            });
        }
    }
    Ok(())
}

fn find_inverses(order: usize, cayley: &[usize]) -> Result<Vec<usize>> {
    (0..order)
        .map(|i| {
            let j = (0..order)
                .find(|&j| cayley[i * order + j] == 0)
                .expect("latin rows contain the identity");
            if cayley[j * order + i] != 0 {
                return Err(Error::GroupAxiom {
                    axiom: "inverse",
                    detail: format!("right inverse {j} of {i} is not a left inverse"),
                });
            }
            Ok(j)
        })
        .collect()
}

fn validate_associativity(order: usize, cayley: &[usize]) -> Result<()> {
    let m = |a: usize, b: usize| cayley[a * order + b];
    let check = |i: usize, j: usize, k: usize| -> Result<()> {
        if m(m(i, j), k) != m(i, m(j, k)) {
            return Err(Error::GroupAxiom {
                axiom: "associativity",
                detail: format!("({i}*{j})*{k} != {i}*({j}*{k})"),
            });
        }
        Ok(())
    };
    if order <= EXHAUSTIVE_ASSOC_LIMIT {
        for i in 0..order {
            for j in 0..order {
                for k in 0..order {
                    check(i, j, k)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6f75_7073);
        for _ in 0..10 * order * order {
            check(
                rng.random_range(0..order),
                rng.random_range(0..order),
                rng.random_range(0..order),
            )?;
        }
    }
    Ok(())
}

/// ℤₙ under addition mod n; element i is named "i".
pub fn make_cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::InvalidParameter("cyclic group order must be ≥ 1".into()));
    }
    let cayley = (0..n * n).map(|p| (p / n + p % n) % n).collect();
    let names = (0..n).map(|i| i.to_string()).collect();
    FiniteGroup::from_flat(n, cayley, names, format!("Z{n}"))
}

/// G₁ × G₂ with componentwise multiplication; (i, j) gets id i·|G₂| + j.
pub fn make_direct_product(g1: &FiniteGroup, g2: &FiniteGroup) -> Result<FiniteGroup> {
    let (n1, n2) = (g1.order, g2.order);
    let n = n1 * n2;
    let mut cayley = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let left = g1.mul_idx(a / n2, b / n2);
            let right = g2.mul_idx(a % n2, b % n2);
            cayley.push(left * n2 + right);
        }
    }
    let names = (0..n)
        .map(|a| format!("({},{})", g1.names[a / n2], g2.names[a % n2]))
        .collect();
    FiniteGroup::from_flat(n, cayley, names, format!("{}x{}", g1.label, g2.label))
}

/// Dihedral group of order 2n: rotations rᵏ at ids 0..n, reflections srᵏ at n..2n.
pub fn make_dihedral(n: usize) -> Result<FiniteGroup> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dihedral group needs n ≥ 2, got {n}")));
    }
    // Element (f, k) = s^f r^k, id f·n + k; r^k s = s r^{-k}.
    let id = |f: usize, k: usize| f * n + k;
    let order = 2 * n;
    let mut cayley = Vec::with_capacity(order * order);
    for a in 0..order {
        let (f1, k1) = (a / n, a % n);
        for b in 0..order {
            let (f2, k2) = (b / n, b % n);
            let prod = if f2 == 0 {
                id(f1, (k1 + k2) % n)
            } else {
                id(1 - f1, (n - k1 + k2) % n)
            };
            cayley.push(prod);
        }
    }
    let rot = |k: usize| match k {
        0 => String::new(),
        1 => "r".to_string(),
        _ => format!("r^{k}"),
    };
    let names = (0..order)
        .map(|a| {
            let (f, k) = (a / n, a % n);
            match (f, k) {
                (0, 0) => "e".to_string(),
                (0, _) => rot(k),
                _ => format!("s{}", rot(k)),
            }
        })
        .collect();
    FiniteGroup::from_flat(order, cayley, names, format!("D{n}"))
}

/// Largest n accepted by [`make_symmetric`].
pub const MAX_SYMMETRIC_DEGREE: usize = 5;

/// Symmetric group Sₙ with permutations in lexicographic order (identity first).
/// Products compose right to left: (στ)(i) = σ(τ(i)).
pub fn make_symmetric(n: usize) -> Result<FiniteGroup> {
    if !(1..=MAX_SYMMETRIC_DEGREE).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "symmetric group degree must be in [1, {MAX_SYMMETRIC_DEGREE}], got {n}"
        )));
    }
    let perms = lexicographic_permutations(n);
    let index_of = |p: &[usize]| {
        perms
            .binary_search_by(|q| q.as_slice().cmp(p))
            .expect("composition stays in Sₙ")
    };
    let order = perms.len();
    let mut cayley = Vec::with_capacity(order * order);
    let mut buf = vec![0; n];
    for sigma in &perms {
        for tau in &perms {
            for (i, slot) in buf.iter_mut().enumerate() {
                *slot = sigma[tau[i]];
            }
            cayley.push(index_of(&buf));
        }
    }
    let names = perms
        .iter()
        .map(|p| p.iter().map(|d| char::from(b'0' + *d as u8)).collect())
        .collect();
    FiniteGroup::from_flat(order, cayley, names, format!("S{n}"))
}

fn lexicographic_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for d in 0..used.len() {
            if !used[d] {
                used[d] = true;
                prefix.push(d);
                rec(prefix, used, out);
                prefix.pop();
                used[d] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// A subgroup, stored as the sorted list of its member ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<GroupElementId>,
}

impl Subgroup {
    /// Subgroup generated by `generators` (closure under multiplication).
    pub fn generated_by(parent: &Arc<FiniteGroup>, generators: &[GroupElementId]) -> Result<Self> {
        for &g in generators {
            parent.check_id(g)?;
        }
        let mut members: BTreeSet<GroupElementId> = BTreeSet::new();
        members.insert(parent.identity());
        let mut frontier = vec![parent.identity()];
        while let Some(h) = frontier.pop() {
            for &g in generators {
                let p = parent.mul(h, g);
                if members.insert(p) {
                    frontier.push(p);
                }
            }
        }
        Ok(Subgroup {
            parent: Arc::clone(parent),
            members: members.into_iter().collect(),
        })
    }

    /// Validates an explicit member list as a subgroup.
    pub fn from_members(parent: &Arc<FiniteGroup>, members: &[GroupElementId]) -> Result<Self> {
        let set: BTreeSet<GroupElementId> = members.iter().copied().collect();
        for &g in &set {
            parent.check_id(g)?;
        }
        if !set.contains(&parent.identity()) {
            return Err(Error::InvalidParameter("subgroup must contain the identity".into()));
        }
        for &a in &set {
            if !set.contains(&parent.inverse(a)) {
                return Err(Error::InvalidParameter(format!("not closed under inverse at {a}")));
            }
            for &b in &set {
                if !set.contains(&parent.mul(a, b)) {
                    return Err(Error::InvalidParameter(format!(
                        "not closed under multiplication at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Subgroup {
            parent: Arc::clone(parent),
            members: set.into_iter().collect(),
        })
    }

    pub fn whole(parent: &Arc<FiniteGroup>) -> Self {
        Subgroup {
            parent: Arc::clone(parent),
            members: parent.elements().collect(),
        }
    }

    pub fn trivial(parent: &Arc<FiniteGroup>) -> Self {
        Subgroup {
            parent: Arc::clone(parent),
            members: vec![parent.identity()],
        }
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[GroupElementId] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: GroupElementId) -> bool {
        self.members.binary_search(&g).is_ok()
    }
}

/// H(g) = ⟨g²⟩.
pub fn subgroup_of_square(group: &Arc<FiniteGroup>, g: GroupElementId) -> Result<Subgroup> {
    group.check_id(g)?;
    let square = group.mul(g, g);
    Subgroup::generated_by(group, &[square])
}

/// Right cosets Hg, each sorted, blocks ordered by their smallest member.
pub fn right_cosets(group: &FiniteGroup, h: &Subgroup) -> Vec<Vec<GroupElementId>> {
    let mut assigned = vec![false; group.order()];
    let mut blocks = Vec::with_capacity(group.order() / h.order());
    // Scanning ids in increasing order makes each block's representative its minimum.
    for g in group.elements() {
        if assigned[g.0] {
            continue;
        }
        let mut block: Vec<GroupElementId> = h.members().iter().map(|&x| group.mul(x, g)).collect();
        block.sort_unstable();
        for x in &block {
            assigned[x.0] = true;
        }
        blocks.push(block);
    }
    blocks
}

/// A verified automorphism φ ∈ Aut(G), given by where it sends each id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    perm: Vec<usize>,
}

impl Automorphism {
    pub fn new(group: &FiniteGroup, perm: Vec<usize>) -> Result<Self> {
        if check_automorphism(group, &perm)? {
            Ok(Automorphism { perm })
        } else {
            Err(Error::InvalidParameter(
                "permutation is not a group automorphism".into(),
            ))
        }
    }

    pub fn identity(group: &FiniteGroup) -> Self {
        Automorphism {
            perm: (0..group.order()).collect(),
        }
    }

    /// Inner automorphism h ↦ g h g⁻¹.
    pub fn conjugation(group: &FiniteGroup, g: GroupElementId) -> Result<Self> {
        group.check_id(g)?;
        let gi = group.inverse(g);
        let perm = group.elements().map(|h| group.mul(group.mul(g, h), gi).0).collect();
        Ok(Automorphism { perm })
    }

    /// h ↦ h⁻¹, an automorphism exactly when the group is abelian.
    pub fn inversion(group: &FiniteGroup) -> Result<Self> {
        Self::new(group, group.inverse_table().to_vec())
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    pub fn apply(&self, g: GroupElementId) -> GroupElementId {
        GroupElementId(self.perm[g.0])
    }
}

/// True iff `perm` fixes the identity and preserves the Cayley table.
pub fn check_automorphism(group: &FiniteGroup, perm: &[usize]) -> Result<bool> {
    let n = group.order();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidParameter(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    if perm[0] != 0 {
        return Ok(false);
    }
    for i in 0..n {
        for j in 0..n {
            if perm[group.mul_idx(i, j)] != group.mul_idx(perm[i], perm[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Parses the group mini-language: `Z<n>`, `D<n>`, `S<n>`, products joined
/// by `x` (e.g. `Z2xZ2xZ3`), or `@file:<path>` for an explicit table.
pub fn parse_group_spec(text: &str) -> Result<FiniteGroup> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix("@file:") {
        return read_cayley_file(Path::new(path), text);
    }
    if text.is_empty() {
        return Err(Error::Syntax("empty group spec".into()));
    }
    let mut factors = text.split('x').map(parse_factor);
    let first = factors.next().expect("split yields at least one piece")?;
    factors.try_fold(first, |acc, f| make_direct_product(&acc, &f?))
}

fn parse_factor(token: &str) -> Result<FiniteGroup> {
    let token = token.trim();
    let mut chars = token.chars();
    let kind = chars
        .next()
        .ok_or_else(|| Error::Syntax("empty factor in product".into()))?;
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Syntax(format!("expected <letter><number> in factor {token:?}")));
    }
    let n: usize = digits
        .parse()
        .map_err(|_| Error::Syntax(format!("number out of range in {token:?}")))?;
    match kind {
        'Z' => make_cyclic(n),
        'D' => make_dihedral(n),
        'S' => make_symmetric(n),
        other => Err(Error::Syntax(format!(
            "unknown group family {other:?} in {token:?} (expected Z, D or S)"
        ))),
    }
}

/// Reads the explicit Cayley-table format:
///
/// ```text
/// |G| = 4                # optional header
/// names: e a b c         # optional
/// 0 1 2 3
/// 1 0 3 2
/// ...
/// ```
///
/// Blank lines and `#` comments are ignored.
pub fn parse_cayley_text(text: &str, label: &str) -> Result<FiniteGroup> {
    let mut declared: Option<usize> = None;
    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("|G|") {
            let n = rest
                .trim_start()
                .strip_prefix('=')
                .map(str::trim)
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| Error::Syntax(format!("line {}: bad order header", lineno + 1)))?;
            declared = Some(n);
            continue;
        }
        if let Some(rest) = line.strip_prefix("names:") {
            names = Some(rest.split_whitespace().map(str::to_string).collect());
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Syntax(format!("line {}: {t:?} is not an element id", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if let Some(n) = declared {
        if n != rows.len() {
            return Err(Error::Syntax(format!(
                "header declares |G| = {n} but {} rows follow",
                rows.len()
            )));
        }
    }
    FiniteGroup::from_table(rows, names, label)
}

fn read_cayley_file(path: &Path, label: &str) -> Result<FiniteGroup> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_cayley_text(&text, label)
}
