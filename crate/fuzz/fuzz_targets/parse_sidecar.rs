#![no_main]

use std::sync::OnceLock;

use lexrsm::frontend::parse_program;
use lexrsm::invariants::parse_sidecar;
use lexrsm::pcfg::{build_pcfg, Pcfg};
use libfuzzer_sys::fuzz_target;

const PROGRAM: &str = include_str!("../../corpus/biased_walk.app");

fn pcfg() -> &'static Pcfg {
    static G: OnceLock<Pcfg> = OnceLock::new();
    G.get_or_init(|| build_pcfg(&parse_program(PROGRAM).unwrap()))
}

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_sidecar(text, pcfg());
    }
});
