//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "coupon.h"

int main(void) {
    CouponDistribution *d = NULL;
    if (coupon_distribution_new_rational("1/16,1/6,1/4,1/8,7/24", &d) != COUPON_STATUS_OK) return 10;
    char *s = NULL;
    if (coupon_tail_exact(d, 2, 2, &s) != COUPON_STATUS_OK) return 11;
    printf("%s\n", s);
    coupon_string_free(s);
    double e = 0.0;
    if (coupon_expectation_f64(d, 1, &e) != COUPON_STATUS_OK) return 12;
    printf("%.6f\n", e);
    if (coupon_tail_f64(d, 9, 1, &e) != COUPON_STATUS_INVALID_ARGUMENT) return 13;
    if (coupon_last_error_message() == NULL) return 14;
    coupon_distribution_free(d);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libcoupon_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let p = coupon_core::DrawDistribution::parse("1/16,1/6,1/4,1/8,7/24").unwrap();
    let tail = coupon_core::collector::tail_closed_form(&p, 2, 2, coupon_core::ArithmeticMode::Exact).unwrap();
    assert_eq!(lines.next().unwrap(), tail.to_string());
    // E(T_1) = 1 / (1 - p_0) = 240 / 215
    assert_eq!(lines.next().unwrap(), format!("{:.6}", 240.0 / 215.0));
}
