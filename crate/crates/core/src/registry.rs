//! Named parameter specs used by the CLI and the tests.

use crate::params::{parse_spec, ParameterSpec};

pub const CHACON_RAW: &str = "name: chacon-raw\ncycle: [r=3, s=(0, 1), last=3h+1]\n";
pub const CHACON: &str = "name: chacon\ncycle: [r=3, s=(A, A+1), carry=3h+3A+1]\n";
pub const CHACON_REVERSED: &str = "name: chacon-reversed\ncycle: [r=3, s=(A+1, A), carry=3h+3A+1]\n";
pub const HK_RAW: &str = "name: hk-raw\ncycle: [r=2, s=(0), last=2h+1]\n";
pub const HK: &str = "name: hk\ncycle: [r=2, s=(A), carry=2h+2A+1]\n";
pub const FINITE_ODOMETER: &str = "name: finite-odometer\ncycle: [r=2, s=(0)]\n";

pub const NAMES: &[&str] = &["chacon-raw", "chacon", "chacon-reversed", "hk-raw", "hk", "finite-odometer"];

fn parsed(text: &str) -> ParameterSpec {
    parse_spec(text).expect("registry spec parses")
}

pub fn chacon_raw() -> ParameterSpec {
    parsed(CHACON_RAW)
}

pub fn chacon() -> ParameterSpec {
    parsed(CHACON)
}

pub fn chacon_reversed() -> ParameterSpec {
    parsed(CHACON_REVERSED)
}

pub fn hk_raw() -> ParameterSpec {
    parsed(HK_RAW)
}

pub fn hk() -> ParameterSpec {
    parsed(HK)
}

pub fn finite_odometer() -> ParameterSpec {
    parsed(FINITE_ODOMETER)
}

/// Look up a spec by registry name.
pub fn lookup(name: &str) -> Option<ParameterSpec> {
    Some(match name {
        "chacon-raw" => chacon_raw(),
        "chacon" => chacon(),
        "chacon-reversed" => chacon_reversed(),
        "hk-raw" => hk_raw(),
        "hk" => hk(),
        "finite-odometer" => finite_odometer(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::normalize;

    #[test]
    fn every_name_resolves() {
        for n in NAMES {
            assert_eq!(lookup(n).unwrap().name, *n);
        }
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn normalized_entries_match_raw() {
        assert_eq!(normalize(&chacon_raw()).unwrap().cycle, chacon().cycle);
        assert_eq!(normalize(&hk_raw()).unwrap().cycle, hk().cycle);
        assert_eq!(chacon().reversed("chacon-reversed"), chacon_reversed());
    }
}
