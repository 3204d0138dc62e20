#![no_main]
use libfuzzer_sys::fuzz_target;
use vri::config::parse_grid;

fuzz_target!(|data: &str| {
    if let Ok(g) = parse_grid(data) {
        assert!(g.n_y >= 2 && g.n_py >= 2);
        assert_eq!(parse_grid(&format!("{},{}", g.n_y, g.n_py)).ok(), Some(g));
    }
});
