//! SAS+ task model and a reader/writer for the translator's output format
//! (version 3).

use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("line {line}: {msg}")]
    Range { line: usize, msg: String },
}

/// A variable=value pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub var: usize,
    pub value: usize,
}

impl Fact {
    pub fn new(var: usize, value: usize) -> Self {
        Fact { var, value }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// Always -1 for accepted tasks.
    pub axiom_layer: i32,
    pub value_names: Vec<String>,
}

impl Variable {
    pub fn domain_size(&self) -> usize {
        self.value_names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    pub conditions: Vec<Fact>,
    pub var: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub name: String,
    /// Sorted by variable, at most one fact per variable.
    pub preconditions: Vec<Fact>,
    pub effects: Vec<Effect>,
    /// Parsed and reported, but search treats every operator as unit cost.
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub variables: Vec<Variable>,
    pub operators: Vec<Operator>,
    pub initial_state: Vec<usize>,
    /// Sorted by variable.
    pub goal: Vec<Fact>,
    pub metric: bool,
    pub mutex_groups: Vec<Vec<Fact>>,
    atoms: AtomTable,
}

/// Dense numbering of all facts: `id(var, val) = sum of domain sizes before var + val`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomTable {
    offsets: Vec<usize>,
    total: usize,
}

impl AtomTable {
    pub fn new(domain_sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = Vec::new();
        let mut total = 0;
        for size in domain_sizes {
            offsets.push(total);
            total += size;
        }
        AtomTable { offsets, total }
    }

    #[inline]
    pub fn id(&self, fact: Fact) -> usize {
        self.offsets[fact.var] + fact.value
    }

    pub fn fact(&self, id: usize) -> Fact {
        assert!(id < self.total, "atom id {id} out of range");
        let var = self.offsets.partition_point(|&o| o <= id) - 1;
        Fact::new(var, id - self.offsets[var])
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn offset(&self, var: usize) -> usize {
        self.offsets[var]
    }
}

impl Task {
    /// Builds a task, checking every range invariant.
    pub fn new(
        variables: Vec<Variable>,
        operators: Vec<Operator>,
        initial_state: Vec<usize>,
        goal: Vec<Fact>,
        metric: bool,
        mutex_groups: Vec<Vec<Fact>>,
    ) -> Result<Task, ParseError> {
        let range = |msg: String| ParseError::Range { line: 0, msg };
        if variables.iter().any(|v| v.domain_size() == 0) {
            return Err(range("empty variable domain".into()));
        }
        let check = |f: &Fact| -> Result<(), ParseError> {
            match variables.get(f.var) {
                Some(v) if f.value < v.domain_size() => Ok(()),
                _ => Err(range(format!("fact {}={} out of range", f.var, f.value))),
            }
        };
        if initial_state.len() != variables.len() {
            return Err(range("initial state does not assign every variable".into()));
        }
        for (var, &value) in initial_state.iter().enumerate() {
            check(&Fact::new(var, value))?;
        }
        goal.iter().try_for_each(check)?;
        for op in &operators {
            op.preconditions.iter().try_for_each(check)?;
            for eff in &op.effects {
                eff.conditions.iter().try_for_each(check)?;
                check(&Fact::new(eff.var, eff.value))?;
            }
        }
        for group in &mutex_groups {
            group.iter().try_for_each(check)?;
        }
        let mut goal = goal;
        goal.sort();
        if goal.windows(2).any(|w| w[0].var == w[1].var) {
            return Err(range("two goal facts on one variable".into()));
        }
        let atoms = AtomTable::new(variables.iter().map(Variable::domain_size));
        Ok(Task {
            variables,
            operators,
            initial_state,
            goal,
            metric,
            mutex_groups,
            atoms,
        })
    }

    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn domain_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables.iter().map(Variable::domain_size)
    }

    pub fn is_goal(&self, values: &[usize]) -> bool {
        self.goal.iter().all(|f| values[f.var] == f.value)
    }

    pub fn fact_name(&self, fact: Fact) -> String {
        format!("{}={}", self.variables[fact.var].name, fact.value)
    }

    /// Writes the task in translator format. Preconditions on variables that an
    /// effect also touches are emitted as that effect's `pre` value, the rest as
    /// prevail conditions.
    pub fn to_sas(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "begin_version\n3\nend_version");
        let _ = writeln!(w, "begin_metric\n{}\nend_metric", u8::from(self.metric));
        let _ = writeln!(w, "{}", self.variables.len());
        for v in &self.variables {
            let _ = writeln!(w, "begin_variable\n{}\n{}\n{}", v.name, v.axiom_layer, v.domain_size());
            for name in &v.value_names {
                let _ = writeln!(w, "{name}");
            }
            let _ = writeln!(w, "end_variable");
        }
        let _ = writeln!(w, "{}", self.mutex_groups.len());
        for group in &self.mutex_groups {
            let _ = writeln!(w, "begin_mutex_group\n{}", group.len());
            for f in group {
                let _ = writeln!(w, "{} {}", f.var, f.value);
            }
            let _ = writeln!(w, "end_mutex_group");
        }
        let _ = writeln!(w, "begin_state");
        for v in &self.initial_state {
            let _ = writeln!(w, "{v}");
        }
        let _ = writeln!(w, "end_state\nbegin_goal\n{}", self.goal.len());
        for f in &self.goal {
            let _ = writeln!(w, "{} {}", f.var, f.value);
        }
        let _ = writeln!(w, "end_goal\n{}", self.operators.len());
        for op in &self.operators {
            let pre_of = |var: usize| op.preconditions.iter().find(|f| f.var == var).map(|f| f.value);
            let prevail: Vec<_> = op
                .preconditions
                .iter()
                .filter(|f| !op.effects.iter().any(|e| e.var == f.var))
                .collect();
            let _ = writeln!(w, "begin_operator\n{}\n{}", op.name, prevail.len());
            for f in prevail {
                let _ = writeln!(w, "{} {}", f.var, f.value);
            }
            let _ = writeln!(w, "{}", op.effects.len());
            for e in &op.effects {
                let _ = write!(w, "{}", e.conditions.len());
                for c in &e.conditions {
                    let _ = write!(w, " {} {}", c.var, c.value);
                }
                let pre = pre_of(e.var).map_or(-1, |v| v as i64);
                let _ = writeln!(w, " {} {} {}", e.var, pre, e.value);
            }
            let _ = writeln!(w, "{}\nend_operator", op.cost);
        }
        let _ = writeln!(w, "0");
        out
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}={}", self.var, self.value)
    }
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .collect::<Vec<_>>();
        // trailing blank lines are harmless
        let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
        Lines {
            lines: lines[..end].to_vec(),
            pos: 0,
        }
    }

    fn line_no(&self) -> usize {
        self.pos
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line_no(),
            msg: msg.into(),
        }
    }

    fn range(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Range {
            line: self.line_no(),
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, ParseError> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| ParseError::Syntax {
                line: self.pos + 1,
                msg: "unexpected end of file".into(),
            })?;
        self.pos += 1;
        Ok(line)
    }

    fn expect(&mut self, keyword: &str) -> Result<(), ParseError> {
        let line = self.next()?;
        if line.trim() == keyword {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{keyword}`, found `{line}`")))
        }
    }

    fn ints(&mut self) -> Result<Vec<i64>, ParseError> {
        let line = self.next()?;
        line.split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| self.syntax(format!("expected integer, found `{t}`"))))
            .collect()
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let v = self.ints()?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(self.syntax("expected a single integer")),
        }
    }

    fn count(&mut self) -> Result<usize, ParseError> {
        let n = self.int()?;
        usize::try_from(n).map_err(|_| self.syntax(format!("negative count {n}")))
    }
}

/// Parses a translated SAS+ task (format version 3).
pub fn parse_sas(text: &str) -> Result<Task, ParseError> {
    let mut lines = Lines::new(text);

    lines.expect("begin_version")?;
    let version = lines.int()?;
    if version != 3 {
        return Err(ParseError::UnsupportedFeature(format!("SAS+ version {version}")));
    }
    lines.expect("end_version")?;

    lines.expect("begin_metric")?;
    let metric = match lines.int()? {
        0 => false,
        1 => true,
        m => return Err(lines.syntax(format!("bad metric flag {m}"))),
    };
    lines.expect("end_metric")?;

    let num_vars = lines.count()?;
    let mut variables = Vec::with_capacity(num_vars);
    for _ in 0..num_vars {
        lines.expect("begin_variable")?;
        let name = lines.next()?.to_string();
        let axiom_layer = lines.int()?;
        if axiom_layer != -1 {
            return Err(ParseError::UnsupportedFeature(format!(
                "variable `{name}` has axiom layer {axiom_layer} (derived predicates)"
            )));
        }
        let size = lines.count()?;
        if size == 0 {
            return Err(lines.range(format!("variable `{name}` has an empty domain")));
        }
        let value_names = (0..size)
            .map(|_| lines.next().map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        lines.expect("end_variable")?;
        variables.push(Variable {
            name,
            axiom_layer: -1,
            value_names,
        });
    }

    let fact = |lines: &Lines, var: i64, value: i64| -> Result<Fact, ParseError> {
        let v = usize::try_from(var)
            .ok()
            .filter(|&v| v < variables.len())
            .ok_or_else(|| lines.range(format!("variable index {var} out of range")))?;
        let d = variables[v].domain_size();
        let x = usize::try_from(value)
            .ok()
            .filter(|&x| x < d)
            .ok_or_else(|| lines.range(format!("value {value} out of domain of variable {v}")))?;
        Ok(Fact::new(v, x))
    };
    let pair = |lines: &mut Lines| -> Result<Fact, ParseError> {
        let v = lines.ints()?;
        match v.as_slice() {
            [var, val] => fact(lines, *var, *val),
            _ => Err(lines.syntax("expected `var value` pair")),
        }
    };

    let num_groups = lines.count()?;
    let mut mutex_groups = Vec::with_capacity(num_groups);
    for _ in 0..num_groups {
        lines.expect("begin_mutex_group")?;
        let n = lines.count()?;
        let group = (0..n).map(|_| pair(&mut lines)).collect::<Result<Vec<_>, _>>()?;
        lines.expect("end_mutex_group")?;
        mutex_groups.push(group);
    }

    lines.expect("begin_state")?;
    let mut initial_state = Vec::with_capacity(num_vars);
    for var in 0..num_vars {
        let value = lines.int()?;
        initial_state.push(fact(&lines, var as i64, value)?.value);
    }
    lines.expect("end_state")?;

    lines.expect("begin_goal")?;
    let n = lines.count()?;
    let mut goal = (0..n).map(|_| pair(&mut lines)).collect::<Result<Vec<_>, _>>()?;
    lines.expect("end_goal")?;
    goal.sort();
    if goal.windows(2).any(|w| w[0].var == w[1].var) {
        return Err(lines.syntax("two goal facts on the same variable"));
    }

    let num_ops = lines.count()?;
    let mut operators = Vec::with_capacity(num_ops);
    for _ in 0..num_ops {
        lines.expect("begin_operator")?;
        let name = lines.next()?.to_string();
        let mut preconditions = Vec::new();
        let prevail = lines.count()?;
        for _ in 0..prevail {
            preconditions.push(pair(&mut lines)?);
        }
        let num_effects = lines.count()?;
        let mut effects = Vec::with_capacity(num_effects);
        for _ in 0..num_effects {
            let nums = lines.ints()?;
            let (&ncond, rest) = nums.split_first().ok_or_else(|| lines.syntax("empty effect line"))?;
            let ncond = usize::try_from(ncond).map_err(|_| lines.syntax("negative condition count"))?;
            if rest.len() != 2 * ncond + 3 {
                return Err(lines.syntax("effect line length does not match its condition count"));
            }
            let conditions = rest[..2 * ncond]
                .chunks(2)
                .map(|c| fact(&lines, c[0], c[1]))
                .collect::<Result<Vec<_>, _>>()?;
            let (var, pre, post) = (rest[2 * ncond], rest[2 * ncond + 1], rest[2 * ncond + 2]);
            let target = fact(&lines, var, post)?;
            if pre != -1 {
                preconditions.push(fact(&lines, var, pre)?);
            }
            effects.push(Effect {
                conditions,
                var: target.var,
                value: target.value,
            });
        }
        preconditions.sort();
        preconditions.dedup();
        if preconditions.windows(2).any(|w| w[0].var == w[1].var) {
            return Err(lines.syntax(format!("operator `{name}` has conflicting preconditions")));
        }
        let cost = lines.int()?;
        let cost = u32::try_from(cost).map_err(|_| lines.range(format!("bad operator cost {cost}")))?;
        lines.expect("end_operator")?;
        operators.push(Operator {
            name,
            preconditions,
            effects,
            cost,
        });
    }

    let num_axioms = lines.count()?;
    if num_axioms != 0 {
        return Err(ParseError::UnsupportedFeature(format!(
            "{num_axioms} axiom rule(s) (derived predicates)"
        )));
    }
    if lines.pos != lines.lines.len() {
        return Err(lines.syntax("trailing content after axiom section"));
    }

    Task::new(variables, operators, initial_state, goal, metric, mutex_groups)
}
