// The decompositions in this crate go through LAPACK; link the system
// OpenBLAS, which on this platform bundles both BLAS and LAPACK drivers.
fn main() {
    println!("cargo:rustc-link-lib=dylib=openblas");
}
