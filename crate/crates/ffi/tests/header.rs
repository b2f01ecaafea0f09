use std::path::Path;
use std::process::Command;

fn read(rel: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)).unwrap()
}

fn exported_functions(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut lines = src.lines().peekable();
    while let Some(line) = lines.next() {
        if line.trim() != "#[no_mangle]" {
            continue;
        }
        for next in lines.by_ref() {
            if let Some(rest) = next.split("extern \"C\" fn ").nth(1) {
                out.push(rest.split('(').next().unwrap().to_string());
                break;
            }
        }
    }
    out
}

#[test]
fn header_declares_every_export() {
    let header = read("include/sylvenc.h");
    let fns = exported_functions(&read("src/lib.rs"));
    assert!(fns.len() >= 12, "{fns:?}");
    for f in &fns {
        assert!(header.contains(&format!(" {f}(")) || header.contains(&format!("*{f}(")), "{f} missing");
    }
}

#[test]
fn header_status_codes_match() {
    let header = read("include/sylvenc.h");
    for (name, code) in [
        ("OK", 0),
        ("NULL_POINTER", 1),
        ("INVALID_INPUT", 2),
        ("SIZE_CAP", 7),
        ("PANIC", 11),
    ] {
        assert!(header.contains(&format!("SYLVENC_STATUS_{name} = {code},")), "{name}");
    }
    assert_eq!(sylvenc_ffi::SylvencStatus::SizeCap as i32, 7);
    assert_eq!(sylvenc_ffi::SylvencStatus::Panic as i32, 11);
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = std::env::temp_dir().join(format!("sylvenc_hdr_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"sylvenc.h\"\nint main(void) { return sylvenc_last_error() == 0 ? 0 : 1; }\n").unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&dir)
        .arg(&src)
        .status()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(status.success());
}
