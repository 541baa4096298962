use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    let out_dir = PathBuf::from(env::var("OUT_DIR").expect("out dir"));

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation");

    let generated = out_dir.join("manifold_hdr.h");
    bindings.write_to_file(&generated);

    // Keep a copy in the source tree so C consumers can use the crate
    // without running the build first. Read-only checkouts still build:
    // a failed refresh is not an error.
    let committed = crate_dir.join("include").join("manifold_hdr.h");
    let fresh = fs::read(&generated).expect("generated header readable");
    let stale = fs::read(&committed).ok();
    if stale.as_deref() != Some(fresh.as_slice()) {
        let _ = fs::create_dir_all(committed.parent().expect("include dir"));
        let _ = fs::write(&committed, &fresh);
    }
}
