//! Named planner configurations compiled into open-list policies.
//!
//! Besides the fixed names, two grammars are accepted:
//!
//! * `ablation:<lists>` where `<lists>` is a comma-separated subset of
//!   `ff, ff+, lm, lm+`; the lists are put in LAMA order and the
//!   `<w<h_lm>, h_lm, g>` list is always appended.
//! * `alt:<lists>` for an arbitrary alternation of the list names below, in
//!   the given order. A trailing `+` makes a list preferred-only.
//!
//! List names: `ff`, `lm`, `f2ff`, `f2lm`, `f4`, `f6`, `wff`, `wlm`, `w`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::open_list::{Heuristic, KeyComponent, OpenPolicy, SublistSpec, DEFAULT_BOOST};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown configuration `{0}`")]
pub struct UnknownConfig(pub String);

pub const NAMED_CONFIGS: &[&str] = &[
    "lama",
    "bfws-f2",
    "bfws-f4",
    "bfws-f6",
    "lama-w-f6",
    "lama-w-f4",
    "lama-w-f2-ff",
    "lama-w-f2-lm",
    "lama-w-wff",
    "lama-w-wlm",
    "lama-w-w",
    "nolan",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub name: String,
    pub sublists: Vec<SublistSpec>,
    pub boost: Option<i64>,
}

fn list(name: &str) -> Option<SublistSpec> {
    use Heuristic::{Ff, Lm};
    use KeyComponent::{Heuristic as H, Novelty, NotPreferred, G};
    let (base, preferred_only) = match name.strip_suffix('+') {
        Some(b) => (b, true),
        None => (name, false),
    };
    let key = match base {
        "ff" => vec![H(Ff)],
        "lm" => vec![H(Lm)],
        "f2ff" => vec![Novelty(vec![Ff]), H(Ff), G],
        "f2lm" => vec![Novelty(vec![Lm]), H(Lm), G],
        "f4" => vec![Novelty(vec![Lm, Ff]), H(Lm), H(Ff), G],
        "f6" => vec![Novelty(vec![Lm, Ff]), NotPreferred, H(Lm), Novelty(vec![Ff]), H(Ff), G],
        "wff" => vec![Novelty(vec![Ff]), G],
        "wlm" => vec![Novelty(vec![Lm]), G],
        "w" => vec![Novelty(vec![]), G],
        _ => return None,
    };
    Some(SublistSpec::new(key, preferred_only))
}

fn lists(names: &[&str]) -> Vec<SublistSpec> {
    names.iter().map(|n| list(n).expect("built-in list name")).collect()
}

const LAMA: [&str; 4] = ["ff", "ff+", "lm", "lm+"];

impl Config {
    pub fn new(name: impl Into<String>, sublists: Vec<SublistSpec>) -> Self {
        let boost = (sublists.len() > 1).then_some(DEFAULT_BOOST);
        Config {
            name: name.into(),
            sublists,
            boost,
        }
    }

    pub fn parse(name: &str) -> Result<Config, UnknownConfig> {
        let unknown = || UnknownConfig(name.to_string());
        let with_lama = |extra: &str| {
            let mut names = LAMA.to_vec();
            names.push(extra);
            lists(&names)
        };
        let sublists = match name {
            "lama" => lists(&LAMA),
            "bfws-f2" => lists(&["f2ff"]),
            "bfws-f4" => lists(&["f4"]),
            "bfws-f6" => lists(&["f6"]),
            "lama-w-f6" => with_lama("f6"),
            "lama-w-f4" => with_lama("f4"),
            "lama-w-f2-ff" => with_lama("f2ff"),
            "lama-w-f2-lm" => with_lama("f2lm"),
            "lama-w-wff" => with_lama("wff"),
            "lama-w-wlm" => with_lama("wlm"),
            "lama-w-w" => with_lama("w"),
            "nolan" => lists(&["ff", "ff+", "lm+", "f2lm"]),
            _ => {
                if let Some(rest) = name.strip_prefix("ablation:") {
                    let chosen: BTreeSet<&str> = rest.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                    if chosen.iter().any(|c| !LAMA.contains(c)) {
                        return Err(unknown());
                    }
                    let mut names: Vec<&str> = LAMA.iter().copied().filter(|l| chosen.contains(l)).collect();
                    names.push("f2lm");
                    lists(&names)
                } else if let Some(rest) = name.strip_prefix("alt:") {
                    let specs = rest
                        .split(',')
                        .map(str::trim)
                        .map(|n| list(n).ok_or_else(unknown))
                        .collect::<Result<Vec<_>, _>>()?;
                    if specs.is_empty() {
                        return Err(unknown());
                    }
                    specs
                } else {
                    return Err(unknown());
                }
            }
        };
        Ok(Config::new(name, sublists))
    }

    /// The 16 subsets of the LAMA lists, each with the `f2lm` list appended.
    pub fn ablations() -> Vec<Config> {
        (0..16u32)
            .map(|mask| {
                let picked: Vec<&str> = (0..4).filter(|b| mask & (1 << b) != 0).map(|b| LAMA[b]).collect();
                Config::parse(&format!("ablation:{}", picked.join(","))).expect("valid ablation")
            })
            .collect()
    }

    pub fn policy(&self) -> OpenPolicy {
        OpenPolicy::new(self.sublists.clone(), self.boost)
    }

    pub fn uses(&self, h: Heuristic) -> bool {
        self.sublists.iter().flat_map(|s| &s.key).any(|c| match c {
            KeyComponent::Heuristic(x) => *x == h,
            KeyComponent::Novelty(p) => p.contains(&h),
            _ => false,
        })
    }

    /// Whether successors need a preferred flag at all.
    pub fn uses_preferred(&self) -> bool {
        self.sublists
            .iter()
            .any(|s| s.preferred_only || s.key.contains(&KeyComponent::NotPreferred))
    }

    /// Distinct novelty partitions, in first-use order.
    pub fn partitions(&self) -> Vec<Vec<Heuristic>> {
        let mut out: Vec<Vec<Heuristic>> = Vec::new();
        for c in self.sublists.iter().flat_map(|s| &s.key) {
            if let KeyComponent::Novelty(p) = c {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        }
        out
    }

    pub fn dump(&self) -> String {
        self.policy().to_string()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_named_configs_compile() {
        for name in NAMED_CONFIGS {
            let c = Config::parse(name).unwrap();
            assert_eq!(c.boost.is_some(), c.sublists.len() > 1, "{name}");
        }
        assert_eq!(Config::parse("bogus"), Err(UnknownConfig("bogus".into())));
        assert!(Config::parse("ablation:ff,xx").is_err());
        assert!(Config::parse("alt:").is_err());
    }

    #[test]
    fn nolan_is_an_ablation() {
        let nolan = Config::parse("nolan").unwrap();
        let abl = Config::parse("ablation:lm+,ff+,ff").unwrap();
        assert_eq!(nolan.sublists, abl.sublists);
    }

    #[test]
    fn ablations_include_f2lm() {
        let all = Config::ablations();
        assert_eq!(all.len(), 16);
        let f2lm = list("f2lm").unwrap();
        for c in &all {
            assert_eq!(c.sublists.last(), Some(&f2lm));
        }
        assert_eq!(all[0].sublists.len(), 1);
        assert_eq!(all[0].boost, None);
    }

    #[test]
    fn lama_w_appends_to_lama() {
        let lama = Config::parse("lama").unwrap();
        let lw = Config::parse("lama-w-f6").unwrap();
        assert_eq!(&lw.sublists[..4], &lama.sublists[..]);
        assert_eq!(lw.sublists[4], list("f6").unwrap());
        assert_eq!(lw.partitions(), vec![vec![Heuristic::Lm, Heuristic::Ff], vec![Heuristic::Ff]]);
    }

    #[test]
    fn plain_width_uses_no_heuristic() {
        let c = Config::parse("alt:w").unwrap();
        assert!(!c.uses(Heuristic::Lm));
        assert!(!c.uses_preferred());
        assert_eq!(c.partitions(), vec![Vec::<Heuristic>::new()]);
    }
}
