//! Variable names and the symmetric-matrix role map.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Ordered variable names, optionally marked as the upper triangle of a
/// symmetric `m × m` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    index: FxHashMap<String, usize>,
    sym: Option<SymRoles>,
}

/// Assignment of variable indices to the slots `(i, j)`, `i <= j`, of a symmetric matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymRoles {
    pub m: usize,
    /// Row-major upper triangle.
    pub slots: Vec<usize>,
}

impl SymRoles {
    pub fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.slots[tri_index(self.m, i, j)]
    }
}

/// Position of `(i, j)`, `i <= j`, in the row-major upper triangle.
pub fn tri_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < m);
    i * m - i * (i + 1) / 2 + j
}

/// Name of entry `(i, j)` (zero-based) of a symmetric matrix variable.
pub fn sym_name(prefix: &str, m: usize, i: usize, j: usize) -> String {
    if m < 10 {
        format!("{prefix}{}{}", i + 1, j + 1)
    } else {
        format!("{prefix}{}_{}", i + 1, j + 1)
    }
}

impl VarTable {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut index = FxHashMap::default();
        for (i, n) in names.iter().enumerate() {
            let n = n.as_ref();
            if !is_identifier(n) {
                return Err(Error::Input(format!("`{n}` is not a valid variable name")));
            }
            if index.insert(n.to_string(), i).is_some() {
                return Err(Error::Input(format!("duplicate variable `{n}`")));
            }
        }
        Ok(VarTable {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            index,
            sym: None,
        })
    }

    /// `prefix1, ..., prefixn` (for example `u1, u2, u3`).
    pub fn indexed(prefix: &str, n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
        VarTable::new(&names).expect("generated names are valid")
    }

    /// `prefix0, ..., prefix(n-1)`.
    pub fn indexed_from_zero(prefix: &str, n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
        VarTable::new(&names).expect("generated names are valid")
    }

    /// The `m(m+1)/2` entries `s11, s12, ..., smm` of a symmetric matrix, with role map.
    pub fn symmetric(prefix: &str, m: usize) -> Self {
        let mut names = Vec::new();
        for i in 0..m {
            for j in i..m {
                names.push(sym_name(prefix, m, i, j));
            }
        }
        let mut t = VarTable::new(&names).expect("generated names are valid");
        t.sym = Some(SymRoles {
            m,
            slots: (0..names.len()).collect(),
        });
        t
    }

    /// Attaches a role map; `slots` lists variable indices in row-major upper-triangular order.
    pub fn with_sym_roles(mut self, m: usize, slots: Vec<usize>) -> Result<Self> {
        if slots.len() != m * (m + 1) / 2 {
            return Err(Error::MissingRoleMap(format!(
                "{} slots given for a {m}x{m} matrix",
                slots.len()
            )));
        }
        let mut seen = vec![false; self.names.len()];
        for &s in &slots {
            if s >= self.names.len() || std::mem::replace(&mut seen[s], true) {
                return Err(Error::MissingRoleMap(format!("slot variable {s} invalid or repeated")));
            }
        }
        self.sym = Some(SymRoles { m, slots });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn sym_roles(&self) -> Option<&SymRoles> {
        self.sym.as_ref()
    }

    /// Variable index of symmetric slot `(i, j)` (zero-based, either order).
    pub fn sym_index(&self, i: usize, j: usize) -> Result<usize> {
        let r = self
            .sym
            .as_ref()
            .ok_or_else(|| Error::MissingRoleMap("variable table has no symmetric roles".into()))?;
        if i >= r.m || j >= r.m {
            return Err(Error::BadIndex(format!("({i}, {j}) outside {0}x{0}", r.m)));
        }
        Ok(r.slot(i, j))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_layout() {
        let t = VarTable::symmetric("s", 3);
        assert_eq!(t.names(), &["s11", "s12", "s13", "s22", "s23", "s33"]);
        assert_eq!(t.sym_index(2, 1).unwrap(), 4);
        assert_eq!(t.sym_index(0, 0).unwrap(), 0);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(VarTable::new(&["a", "a"]).is_err());
        assert!(VarTable::new(&["1a"]).is_err());
    }

    #[test]
    fn missing_roles() {
        let t = VarTable::indexed("u", 3);
        assert!(matches!(t.sym_index(0, 0), Err(Error::MissingRoleMap(_))));
    }
}
