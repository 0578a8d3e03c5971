fn main() {
    // lapack-sys only declares the FFI surface; the system OpenBLAS
    // (which bundles LAPACK) provides the implementation.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
