//! Expressions in `x` and `y`, evaluated through a thread-local builtin
//! context so the parsed expression can be shared across threads.

use meval::{Context, Expr};

use crate::error::{Error, Result};
use crate::Point;

thread_local!(static BUILTINS: Context<'static> = Context::new());

#[derive(Debug, Clone)]
pub struct Formula {
    source: String,
    expr: Expr,
}

impl Formula {
    /// Parses `source`; variables other than `x` and `y` are rejected.
    pub fn parse_xy(source: &str) -> Result<Self> {
        let err = |e: meval::Error| Error::Formula { formula: source.to_string(), message: e.to_string() };
        let expr: Expr = source.parse().map_err(err)?;
        let _ = expr.clone().bind2("x", "y").map_err(err)?;
        Ok(Formula { source: source.to_string(), expr })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Value at `p`; NaN where the expression is undefined.
    pub fn eval(&self, p: Point) -> f64 {
        BUILTINS.with(|c| {
            let vars = [("x", p.re), ("y", p.im)];
            self.expr.eval_with_context((vars, c)).unwrap_or(f64::NAN)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    #[test]
    fn evaluates_with_builtins() {
        let f = Formula::parse_xy("ln(sqrt(x^2 + y^2)) + max(x, y)").unwrap();
        let p = pt(0.3, 0.4);
        assert!((f.eval(p) - (0.5f64.ln() + 0.4)).abs() < 1e-14);
    }

    #[test]
    fn rejects_unknown_variables() {
        assert!(matches!(Formula::parse_xy("x + z"), Err(Error::Formula { .. })));
        assert!(matches!(Formula::parse_xy("x +"), Err(Error::Formula { .. })));
    }

    #[test]
    fn shared_across_threads() {
        let f = std::sync::Arc::new(Formula::parse_xy("x * y").unwrap());
        let g = f.clone();
        let v = std::thread::spawn(move || g.eval(pt(2.0, 3.0))).join().unwrap();
        assert_eq!(v, 6.0);
    }
}
