//! Boolean expressions over node references, plus recovery of a compact
//! formula from a truth table (Quine-McCluskey with a greedy cover).

use std::collections::BTreeSet;

/// Expression tree. `Var(i)` refers to the zero-based node index `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Var(usize),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(i: usize) -> Self {
        BoolExpr::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn xor(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Xor(Box::new(a), Box::new(b))
    }

    /// Conjunction of a list; `true` when empty.
    pub fn and_all(mut items: Vec<BoolExpr>) -> Self {
        if items.is_empty() {
            return BoolExpr::Const(true);
        }
        let first = items.remove(0);
        items.into_iter().fold(first, BoolExpr::and)
    }

    /// Disjunction of a list; `false` when empty.
    pub fn or_all(mut items: Vec<BoolExpr>) -> Self {
        if items.is_empty() {
            return BoolExpr::Const(false);
        }
        let first = items.remove(0);
        items.into_iter().fold(first, BoolExpr::or)
    }

    pub fn eval<F: Fn(usize) -> bool>(&self, value: &F) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(i) => value(*i),
            BoolExpr::Not(e) => !e.eval(value),
            BoolExpr::And(a, b) => a.eval(value) && b.eval(value),
            BoolExpr::Or(a, b) => a.eval(value) || b.eval(value),
            BoolExpr::Xor(a, b) => a.eval(value) ^ b.eval(value),
        }
    }

    /// Evaluates against a full state vector indexed by node.
    pub fn eval_state(&self, state: &[bool]) -> bool {
        self.eval(&|i| state[i])
    }

    /// Every node index that appears syntactically.
    pub fn referenced(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut BTreeSet<usize>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(i) => {
                out.insert(*i);
            }
            BoolExpr::Not(e) => e.collect_refs(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Xor(a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
        }
    }

    /// Replaces every `Var(i)` by `f(i)`.
    pub fn substitute<F: Fn(usize) -> BoolExpr>(&self, f: &F) -> BoolExpr {
        match self {
            BoolExpr::Const(b) => BoolExpr::Const(*b),
            BoolExpr::Var(i) => f(*i),
            BoolExpr::Not(e) => BoolExpr::not(e.substitute(f)),
            BoolExpr::And(a, b) => BoolExpr::and(a.substitute(f), b.substitute(f)),
            BoolExpr::Or(a, b) => BoolExpr::or(a.substitute(f), b.substitute(f)),
            BoolExpr::Xor(a, b) => BoolExpr::xor(a.substitute(f), b.substitute(f)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::Xor(..) => 2,
            BoolExpr::And(..) => 3,
            BoolExpr::Not(_) => 4,
            BoolExpr::Const(_) | BoolExpr::Var(_) => 5,
        }
    }

    /// Renders with the DSL operators `! & ^ |` and only the parentheses the
    /// precedence rules require.
    pub fn render<F: Fn(usize) -> String>(&self, name: &F) -> String {
        let mut out = String::new();
        self.render_into(name, &mut out);
        out
    }

    fn render_into<F: Fn(usize) -> String>(&self, name: &F, out: &mut String) {
        match self {
            BoolExpr::Const(b) => out.push(if *b { '1' } else { '0' }),
            BoolExpr::Var(i) => out.push_str(&name(*i)),
            BoolExpr::Not(e) => {
                out.push('!');
                e.render_child(name, out, 4, false);
            }
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Xor(a, b) => {
                let prec = self.precedence();
                let op = match self {
                    BoolExpr::And(..) => " & ",
                    BoolExpr::Or(..) => " | ",
                    _ => " ^ ",
                };
                a.render_child(name, out, prec, false);
                out.push_str(op);
                b.render_child(name, out, prec, true);
            }
        }
    }

    fn render_child<F: Fn(usize) -> String>(&self, name: &F, out: &mut String, parent: u8, right: bool) {
        let own = self.precedence();
        let paren = own < parent || (right && own == parent && own < 4);
        if paren {
            out.push('(');
        }
        self.render_into(name, out);
        if paren {
            out.push(')');
        }
    }
}

/// Value of the variable at `pos` (0 = highest-order factor) in zero-based
/// column `col` of a `k`-input truth table under `σ(x) = δ_2^{2-x}`.
pub fn column_bit(col: usize, pos: usize, k: usize) -> bool {
    (col >> (k - 1 - pos)) & 1 == 0
}

/// Zero-based column for an assignment given in factor order.
pub fn column_of(values: &[bool]) -> usize {
    values.iter().fold(0usize, |acc, &v| (acc << 1) | usize::from(!v))
}

const MINIMIZE_LIMIT: usize = 10;

/// Builds a formula over `vars` (factor order) whose truth table, laid out in
/// canonical column order, equals `table`.
pub fn formula_from_table(vars: &[usize], table: &[bool]) -> BoolExpr {
    let k = vars.len();
    assert_eq!(table.len(), 1usize << k, "truth table length must be 2^k");
    if table.iter().all(|&b| b) {
        return BoolExpr::Const(true);
    }
    if table.iter().all(|&b| !b) {
        return BoolExpr::Const(false);
    }
    if k == 2 {
        if let Some(e) = two_input_special(vars, table) {
            return e;
        }
    }
    let positive = cover_for(vars, table, true);
    let negative = cover_for(vars, table, false);
    if literal_count(&negative) + 1 < literal_count(&positive) {
        BoolExpr::not(negative)
    } else {
        positive
    }
}

fn two_input_special(vars: &[usize], table: &[bool]) -> Option<BoolExpr> {
    let a = BoolExpr::var(vars[0]);
    let b = BoolExpr::var(vars[1]);
    // canonical columns: (1,1) (1,0) (0,1) (0,0)
    match table {
        [false, true, true, false] => Some(BoolExpr::xor(a, b)),
        [true, false, false, true] => Some(BoolExpr::not(BoolExpr::xor(a, b))),
        _ => None,
    }
}

fn literal_count(e: &BoolExpr) -> usize {
    match e {
        BoolExpr::Const(_) => 0,
        BoolExpr::Var(_) => 1,
        BoolExpr::Not(x) => literal_count(x),
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Xor(a, b) => literal_count(a) + literal_count(b),
    }
}

/// Implicant over `k` variables: `care` marks constrained positions, `value`
/// their required values (bit `p` = variable at factor position `p`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Implicant {
    care: u32,
    value: u32,
}

impl Implicant {
    fn covers(&self, minterm: u32) -> bool {
        minterm & self.care == self.value
    }
}

fn cover_for(vars: &[usize], table: &[bool], polarity: bool) -> BoolExpr {
    let k = vars.len();
    let full = if k == 0 { 0 } else { (1u32 << k) - 1 };
    let minterms: Vec<u32> = (0..table.len())
        .filter(|&c| table[c] == polarity)
        .map(|c| (0..k).fold(0u32, |acc, p| acc | (u32::from(column_bit(c, p, k)) << p)))
        .collect();
    let chosen: Vec<Implicant> = if k <= MINIMIZE_LIMIT {
        let primes = prime_implicants(&minterms, full);
        greedy_cover(&primes, &minterms)
    } else {
        minterms.iter().map(|&m| Implicant { care: full, value: m }).collect()
    };
    let terms = chosen
        .iter()
        .map(|imp| {
            let lits = (0..k)
                .filter(|&p| imp.care >> p & 1 == 1)
                .map(|p| {
                    let v = BoolExpr::var(vars[p]);
                    if imp.value >> p & 1 == 1 {
                        v
                    } else {
                        BoolExpr::not(v)
                    }
                })
                .collect();
            BoolExpr::and_all(lits)
        })
        .collect();
    BoolExpr::or_all(terms)
}

fn prime_implicants(minterms: &[u32], full: u32) -> Vec<Implicant> {
    let mut current: BTreeSet<Implicant> = minterms.iter().map(|&m| Implicant { care: full, value: m }).collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let items: Vec<Implicant> = current.iter().copied().collect();
        let mut merged_flags = vec![false; items.len()];
        let mut next = BTreeSet::new();
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                let (a, b) = (items[i], items[j]);
                if a.care != b.care {
                    continue;
                }
                let diff = a.value ^ b.value;
                if diff.count_ones() == 1 {
                    next.insert(Implicant {
                        care: a.care & !diff,
                        value: a.value & !diff,
                    });
                    merged_flags[i] = true;
                    merged_flags[j] = true;
                }
            }
        }
        for (imp, merged) in items.into_iter().zip(merged_flags) {
            if !merged {
                primes.insert(imp);
            }
        }
        current = next;
    }
    primes.into_iter().collect()
}

fn greedy_cover(primes: &[Implicant], minterms: &[u32]) -> Vec<Implicant> {
    let mut uncovered: BTreeSet<u32> = minterms.iter().copied().collect();
    let mut chosen = Vec::new();
    // essential primes first
    for &m in minterms {
        let covering: Vec<&Implicant> = primes.iter().filter(|p| p.covers(m)).collect();
        if covering.len() == 1 && !chosen.contains(covering[0]) {
            chosen.push(*covering[0]);
        }
    }
    for imp in &chosen {
        uncovered.retain(|&m| !imp.covers(m));
    }
    while !uncovered.is_empty() {
        let best = primes
            .iter()
            .max_by_key(|p| {
                (
                    uncovered.iter().filter(|&&m| p.covers(m)).count(),
                    std::cmp::Reverse(p.care.count_ones()),
                )
            })
            .copied()
            .expect("primes cover every minterm");
        uncovered.retain(|&m| !best.covers(m));
        chosen.push(best);
    }
    chosen.sort();
    chosen
}
