//! Templates shipped with the library.

use crate::lang::LangError;
use crate::template::Template;

#[derive(Clone, Copy, Debug)]
pub struct Bundled {
    pub name: &'static str,
    pub source: &'static str,
}

impl Bundled {
    /// Identifier used in reports, e.g. `bundled:sum_compare`.
    pub fn id(&self) -> String {
        format!("bundled:{}", self.name)
    }

    pub fn template(&self) -> Result<Template, LangError> {
        Template::parse(self.source)
    }
}

pub const TEMPLATES: &[Bundled] = &[
    Bundled { name: "sum_compare", source: include_str!("../templates/sum_compare.tj") },
    Bundled { name: "dead_branch", source: include_str!("../templates/dead_branch.tj") },
    Bundled { name: "bench50", source: include_str!("../templates/bench50.tj") },
    Bundled { name: "const_relation", source: include_str!("../templates/const_relation.tj") },
    Bundled { name: "overflow_add", source: include_str!("../templates/overflow_add.tj") },
    Bundled { name: "self_compare", source: include_str!("../templates/self_compare.tj") },
    Bundled { name: "counter_guard", source: include_str!("../templates/counter_guard.tj") },
    Bundled { name: "logic_mix", source: include_str!("../templates/logic_mix.tj") },
    Bundled { name: "nested_loops", source: include_str!("../templates/nested_loops.tj") },
    Bundled { name: "state_cycle", source: include_str!("../templates/state_cycle.tj") },
    Bundled { name: "decl_init", source: include_str!("../templates/decl_init.tj") },
    Bundled { name: "wrap_compare", source: include_str!("../templates/wrap_compare.tj") },
];

pub fn get(name: &str) -> Option<&'static Bundled> {
    let name = name.strip_prefix("bundled:").unwrap_or(name);
    TEMPLATES.iter().find(|b| b.name == name)
}

/// All bundled templates with their ids.
pub fn all() -> Vec<(String, Template)> {
    TEMPLATES.iter().map(|b| (b.id(), b.template().expect("bundled template is valid"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_parse() {
        assert!(TEMPLATES.len() >= 10);
        for b in TEMPLATES {
            b.template().unwrap_or_else(|e| panic!("{}: {e}", b.name));
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(get("bundled:sum_compare").unwrap().name, "sum_compare");
        assert_eq!(get("sum_compare").unwrap().template().unwrap().hole_count(), 5);
        assert_eq!(get("bench50").unwrap().template().unwrap().hole_count(), 50);
        assert!(get("nope").is_none());
    }
}
