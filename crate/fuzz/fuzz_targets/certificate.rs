#![no_main]

use std::sync::OnceLock;

use lexrsm::frontend::{parse_program, Ast};
use lexrsm::lexrsm::{program_digest, Certificate};
use lexrsm::pcfg::{build_pcfg, Pcfg};
use libfuzzer_sys::fuzz_target;

const PROGRAM: &str = include_str!("../../corpus/coin_doubling.app");

fn fixture() -> &'static (Ast, Pcfg, String) {
    static F: OnceLock<(Ast, Pcfg, String)> = OnceLock::new();
    F.get_or_init(|| {
        let ast = parse_program(PROGRAM).unwrap();
        let g = build_pcfg(&ast);
        let digest = program_digest(&ast);
        (ast, g, digest)
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cert) = Certificate::parse(text) else { return };
    let (_, g, digest) = fixture();
    if let Ok(map) = cert.resolve(g, digest) {
        let again = Certificate::from_map(g, digest, &map);
        assert!(again.resolve(g, digest).is_ok());
    }
});
