use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config =
        cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation");
    let mut rendered = Vec::new();
    bindings.write(&mut rendered);
    let header = crate_dir.join("include/tdaport.h");
    // Rewriting an unchanged header would retrigger downstream C builds.
    if std::fs::read(&header).ok().as_deref() != Some(rendered.as_slice()) {
        std::fs::create_dir_all(header.parent().unwrap()).unwrap();
        std::fs::write(&header, rendered).unwrap();
    }
}
