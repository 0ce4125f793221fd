fn main() {
    // System OpenBLAS ships the full LAPACK symbol set; the `lapack` crate
    // only declares the FFI signatures.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
