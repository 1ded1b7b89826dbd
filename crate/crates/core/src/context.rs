//! Jet-space declarations.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ratfunc::RatFunc;

/// What an arbitrary-function symbol is applied to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    /// `h(x_{i₁}, …)` with argument indices into the independent variables.
    Plain { args: Vec<usize> },
    /// `h(ω)` for a differential function `ω` of the same context.
    Composite { arg: RatFunc },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionSymbol {
    pub name: String,
    pub kind: FunctionKind,
}

impl FunctionSymbol {
    pub fn arity(&self) -> usize {
        match &self.kind {
            FunctionKind::Plain { args } => args.len(),
            FunctionKind::Composite { .. } => 1,
        }
    }
}

/// Independent variables, unknowns and arbitrary-function symbols.
///
/// Kernels `sin`, `cos`, `exp` of every independent variable are always
/// available and need no declaration.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct JetContext {
    independent: Vec<String>,
    dependent: Vec<String>,
    functions: Vec<FunctionSymbol>,
}

const RESERVED: &[&str] = &["sin", "cos", "exp", "der", "vars", "unknowns", "funcs"];

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
        && !RESERVED.contains(&name)
}

impl JetContext {
    pub fn new<S: AsRef<str>>(
        independent: &[S],
        dependent: &[S],
        functions: &[(S, Vec<S>)],
    ) -> Result<Arc<Self>> {
        let independent: Vec<String> = independent.iter().map(|s| s.as_ref().to_owned()).collect();
        let dependent: Vec<String> = dependent.iter().map(|s| s.as_ref().to_owned()).collect();
        if independent.is_empty() {
            return Err(Error::InvalidContext("no independent variables".into()));
        }
        if independent.len() > u16::MAX as usize || dependent.len() > u16::MAX as usize {
            return Err(Error::InvalidContext("too many variables".into()));
        }
        let mut fs = Vec::with_capacity(functions.len());
        for (name, args) in functions {
            let mut idx = Vec::with_capacity(args.len());
            for a in args {
                let i = independent
                    .iter()
                    .position(|v| v == a.as_ref())
                    .ok_or_else(|| {
                        Error::InvalidContext(format!(
                            "argument `{}` of `{}` is not an independent variable",
                            a.as_ref(),
                            name.as_ref()
                        ))
                    })?;
                if idx.contains(&i) {
                    return Err(Error::InvalidContext(format!(
                        "repeated argument in `{}`",
                        name.as_ref()
                    )));
                }
                idx.push(i);
            }
            fs.push(FunctionSymbol {
                name: name.as_ref().to_owned(),
                kind: FunctionKind::Plain { args: idx },
            });
        }
        let ctx = JetContext {
            independent,
            dependent,
            functions: fs,
        };
        ctx.check_names()?;
        Ok(Arc::new(ctx))
    }

    /// Parses a header such as `vars t x y; unknowns u; funcs h(t) f(t);`.
    pub fn parse(header: &str) -> Result<Arc<Self>> {
        let mut indep: Vec<String> = Vec::new();
        let mut dep: Vec<String> = Vec::new();
        let mut funcs: Vec<(String, Vec<String>)> = Vec::new();
        let mut offset = 0;
        for clause in header.split(';') {
            let start = offset;
            offset += clause.len() + 1;
            let trimmed = clause.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
            match keyword {
                "vars" => indep.extend(rest.split_whitespace().map(str::to_owned)),
                "unknowns" => dep.extend(rest.split_whitespace().map(str::to_owned)),
                "funcs" => funcs.extend(parse_func_decls(rest, start)?),
                other => {
                    return Err(Error::Syntax {
                        pos: start + clause.find(other).unwrap_or(0),
                        msg: format!("unknown declaration `{other}`"),
                    })
                }
            }
        }
        let funcs: Vec<(String, Vec<String>)> = funcs;
        Self::new(&indep, &dep, &funcs)
    }

    fn check_names(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let names = self
            .independent
            .iter()
            .chain(&self.dependent)
            .chain(self.functions.iter().map(|f| &f.name));
        for n in names {
            if !valid_name(n) {
                return Err(Error::InvalidContext(format!("invalid name `{n}`")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidContext(format!("duplicate name `{n}`")));
            }
        }
        Ok(())
    }

    pub fn n_independent(&self) -> usize {
        self.independent.len()
    }

    pub fn n_dependent(&self) -> usize {
        self.dependent.len()
    }

    pub fn independent(&self) -> &[String] {
        &self.independent
    }

    pub fn dependent(&self) -> &[String] {
        &self.dependent
    }

    pub fn functions(&self) -> &[FunctionSymbol] {
        &self.functions
    }

    pub fn function(&self, i: usize) -> &FunctionSymbol {
        &self.functions[i]
    }

    pub fn independent_index(&self, name: &str) -> Option<usize> {
        self.independent.iter().position(|v| v == name)
    }

    pub fn dependent_index(&self, name: &str) -> Option<usize> {
        self.dependent.iter().position(|v| v == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    /// Jet suffixes like `u_tx` are unambiguous only when every independent
    /// variable has a one-letter name.
    pub fn suffix_notation(&self) -> bool {
        self.independent.iter().all(|v| v.len() == 1)
    }

    fn is_taken(&self, name: &str) -> bool {
        self.independent.iter().any(|v| v == name)
            || self.dependent.iter().any(|v| v == name)
            || self.functions.iter().any(|f| f.name == name)
    }

    /// `base` itself if free, otherwise `base1`, `base2`, ….
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.is_taken(base) {
            return base.to_owned();
        }
        (1..)
            .map(|k| format!("{base}{k}"))
            .find(|n| !self.is_taken(n))
            .expect("unbounded search")
    }

    /// Extends the context by a fresh plain function symbol.
    pub fn with_function(&self, base: &str, args: &[usize]) -> (Arc<Self>, usize) {
        let mut ctx = self.clone();
        let name = self.fresh_name(base);
        ctx.functions.push(FunctionSymbol {
            name,
            kind: FunctionKind::Plain {
                args: args.to_vec(),
            },
        });
        let idx = ctx.functions.len() - 1;
        (Arc::new(ctx), idx)
    }

    /// Extends the context by a fresh symbol applied to a differential function.
    pub fn with_composite(&self, base: &str, arg: RatFunc) -> (Arc<Self>, usize) {
        let mut ctx = self.clone();
        let name = self.fresh_name(base);
        ctx.functions.push(FunctionSymbol {
            name,
            kind: FunctionKind::Composite { arg },
        });
        let idx = ctx.functions.len() - 1;
        (Arc::new(ctx), idx)
    }

    /// Whether `self` is `base` with possibly extra function symbols appended.
    pub fn extends(&self, base: &JetContext) -> bool {
        self.independent == base.independent
            && self.dependent == base.dependent
            && self.functions.len() >= base.functions.len()
            && self.functions[..base.functions.len()] == base.functions[..]
    }

    pub(crate) fn check_var(&self, i: usize) -> Result<()> {
        if i < self.independent.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(i))
        }
    }

    pub(crate) fn check_dep(&self, a: usize) -> Result<()> {
        if a < self.dependent.len() {
            Ok(())
        } else {
            Err(Error::UnknownDependent(a))
        }
    }

    /// The declaration header; composite symbols are internal and omitted.
    pub fn header(&self) -> String {
        let mut out = format!("vars {}", self.independent.join(" "));
        if !self.dependent.is_empty() {
            out.push_str(&format!("; unknowns {}", self.dependent.join(" ")));
        }
        let plain: Vec<String> = self
            .functions
            .iter()
            .filter_map(|f| match &f.kind {
                FunctionKind::Plain { args } => Some(format!(
                    "{}({})",
                    f.name,
                    args.iter()
                        .map(|&i| self.independent[i].as_str())
                        .collect::<Vec<_>>()
                        .join(",")
                )),
                FunctionKind::Composite { .. } => None,
            })
            .collect();
        if !plain.is_empty() {
            out.push_str(&format!("; funcs {}", plain.join(" ")));
        }
        out
    }
}

fn parse_func_decls(text: &str, base: usize) -> Result<Vec<(String, Vec<String>)>> {
    let mut out = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            return Ok(out);
        }
        let pos = base + text.len() - rest.len();
        let open = rest.find('(');
        let name_end = rest
            .find(|c: char| c.is_whitespace() || c == '(')
            .unwrap_or(rest.len());
        let name = &rest[..name_end];
        match open {
            Some(o) if o == name_end || rest[name_end..o].trim().is_empty() => {
                let close = rest[o..].find(')').ok_or(Error::Syntax {
                    pos,
                    msg: format!("unterminated argument list of `{name}`"),
                })? + o;
                let args = rest[o + 1..close]
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_owned)
                    .collect();
                out.push((name.to_owned(), args));
                rest = &rest[close + 1..];
            }
            _ => {
                // a bare name declares a constant symbol
                out.push((name.to_owned(), Vec::new()));
                rest = &rest[name_end..];
            }
        }
    }
}

impl fmt::Debug for JetContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetContext({})", self.header())
    }
}

impl fmt::Display for JetContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.header())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let ctx = JetContext::parse("vars t x y; unknowns psi; funcs h(t) f(t) g(t);").unwrap();
        assert_eq!(ctx.n_independent(), 3);
        assert_eq!(ctx.dependent(), ["psi"]);
        assert_eq!(ctx.functions().len(), 3);
        assert_eq!(ctx.header(), "vars t x y; unknowns psi; funcs h(t) f(t) g(t)");
        assert_eq!(*JetContext::parse(&ctx.header()).unwrap(), *ctx);
    }

    #[test]
    fn rejects_bad_declarations() {
        assert!(JetContext::parse("vars t t; unknowns u").is_err());
        assert!(JetContext::parse("vars t; unknowns u; funcs h(x)").is_err());
        assert!(JetContext::parse("vars t; unknowns t").is_err());
        assert!(JetContext::parse("unknowns u").is_err());
        assert!(JetContext::parse("vars t; knowns u").is_err());
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let ctx = JetContext::parse("vars t; unknowns u; funcs h(t)").unwrap();
        let (ext, i) = ctx.with_function("h", &[0]);
        assert_eq!(ext.function(i).name, "h1");
        assert!(ext.extends(&ctx));
        assert!(!ctx.extends(&ext));
    }
}
