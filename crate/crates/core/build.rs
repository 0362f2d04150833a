fn main() {
    // Reference LAPACK/BLAS from the distribution; only zheevd/zheevr/dsyevd
    // are called, through lapack-sys.
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
