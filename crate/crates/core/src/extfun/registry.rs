use std::collections::BTreeMap;
use std::sync::Arc;

use crate::tracer::{ExternalEnv, ExternalFault};

type ExtFn = Arc<dyn Fn(&[i64]) -> i64 + Send + Sync>;

/// Named pure integer functions callable as `Class.method(..)`.
#[derive(Clone, Default)]
pub struct Registry {
    functions: BTreeMap<String, (usize, ExtFn)>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.functions.keys()).finish()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// `Math.pow`, `Math.max`, `Math.min` and `Math.abs` over integers.
    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register("Math.pow", 2, |a| int_pow(a[0], a[1]));
        r.register("Math.max", 2, |a| a[0].max(a[1]));
        r.register("Math.min", 2, |a| a[0].min(a[1]));
        r.register("Math.abs", 1, |a| a[0].wrapping_abs());
        r
    }

    /// Adds or replaces a function. It must be pure.
    pub fn register(
        &mut self,
        name: &str,
        arity: usize,
        f: impl Fn(&[i64]) -> i64 + Send + Sync + 'static,
    ) {
        self.functions
            .insert(name.to_string(), (arity, Arc::new(f)));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    pub fn apply(&self, name: &str, args: &[i64]) -> Result<i64, ExternalFault> {
        let (arity, f) = self
            .functions
            .get(name)
            .ok_or_else(|| ExternalFault::Unregistered(name.to_string()))?;
        if *arity != args.len() {
            return Err(ExternalFault::Arity {
                name: name.to_string(),
                expected: *arity,
                got: args.len(),
            });
        }
        Ok(f(args))
    }
}

impl ExternalEnv for Registry {
    fn call(&mut self, name: &str, args: &[i64]) -> Result<i64, ExternalFault> {
        self.apply(name, args)
    }
}

/// Integer power; negative exponents truncate toward zero like `(int) Math.pow`.
fn int_pow(base: i64, exp: i64) -> i64 {
    if exp < 0 {
        return match base {
            1 => 1,
            -1 if exp % 2 == 0 => 1,
            -1 => -1,
            _ => 0,
        };
    }
    let mut acc: i64 = 1;
    let mut b = base;
    let mut e = exp as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.wrapping_mul(b);
        }
        b = b.wrapping_mul(b);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_functions() {
        let r = Registry::standard();
        assert_eq!(r.apply("Math.pow", &[2, 3]), Ok(8));
        assert_eq!(r.apply("Math.pow", &[2, -1]), Ok(0));
        assert_eq!(r.apply("Math.max", &[2, 3]), Ok(3));
        assert_eq!(r.apply("Math.abs", &[-4]), Ok(4));
        assert!(matches!(
            r.apply("Math.abs", &[1, 2]),
            Err(ExternalFault::Arity { .. })
        ));
        assert!(matches!(
            r.apply("Foo.bar", &[]),
            Err(ExternalFault::Unregistered(_))
        ));
    }
}
