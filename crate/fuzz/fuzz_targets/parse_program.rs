#![no_main]

use lexrsm::frontend::{parse_program, pretty_print};
use lexrsm::pcfg::build_pcfg;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(source) = std::str::from_utf8(data) else { return };
    let Ok(ast) = parse_program(source) else { return };
    // Anything accepted must survive a print/parse round trip.
    let printed = pretty_print(&ast);
    let again = parse_program(&printed).expect("printed program reparses");
    assert_eq!(pretty_print(&again), printed);
    build_pcfg(&ast);
});
