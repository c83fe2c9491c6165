//! Tabulated force-length and force-velocity curves.

use std::fmt::Write;

use myowalk_core::muscle::{g_al, g_p, g_v, CurveParams};

/// Normalized fiber length grid, 0.3 to 1.9 in steps of 0.01.
pub fn length_grid() -> impl Iterator<Item = f64> {
    (0..=160).map(|i| 0.3 + i as f64 * 0.01)
}

/// Normalized velocity grid, −1.5 to 1.5 in steps of 0.01.
pub fn velocity_grid() -> impl Iterator<Item = f64> {
    (0..=300).map(|i| -1.5 + i as f64 * 0.01)
}

/// `l_tilde,g_al,g_p` rows.
pub fn force_length_csv(c: &CurveParams) -> String {
    let mut s = String::from("l_tilde,g_al,g_p\n");
    for l in length_grid() {
        let a = g_al(l, c).expect("grid is positive");
        let p = g_p(l, c).expect("grid is positive");
        writeln!(s, "{l:.2},{a:.8},{p:.8}").unwrap();
    }
    s
}

/// `v_tilde,g_v` rows.
pub fn force_velocity_csv(c: &CurveParams) -> String {
    let mut s = String::from("v_tilde,g_v\n");
    for v in velocity_grid() {
        writeln!(s, "{v:.2},{:.8}", g_v(v, c)).unwrap();
    }
    s
}
