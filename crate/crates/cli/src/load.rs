use std::path::{Path, PathBuf};

use profgen_core::spec_io::{self, Diagnostic, Format, ParseDiagnostics};
use profgen_core::DisorderSpec;

use crate::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unnamed".to_string())
}

/// `path:line:col: ...`, or `path: ...` when the finding has no position.
pub fn located(path: &Path, d: &Diagnostic) -> String {
    if d.line > 0 {
        format!("{}:{d}", path.display())
    } else {
        format!("{}: {d}", path.display())
    }
}

/// Parses a spec file; the format follows the extension.
pub fn parse(path: &Path) -> Result<Result<(DisorderSpec, ParseDiagnostics), ParseDiagnostics>, Failure> {
    let text = read(path)?;
    Ok(spec_io::parse(&text, Format::from_path(path), &stem(path)))
}

/// Loads a spec, printing warnings to stderr; any error is a domain failure.
pub fn spec(path: &Path) -> Result<DisorderSpec, Failure> {
    match parse(path)? {
        Ok((d, diags)) => {
            for w in diags.warnings() {
                eprintln!("{}", located(path, w));
            }
            Ok(d)
        }
        Err(diags) => {
            let lines: Vec<String> = diags
                .items
                .iter()
                .map(|d| located(path, d))
                .collect();
            Err(Failure::Domain(format!("invalid spec\n{}", lines.join("\n"))))
        }
    }
}

/// Files named directly, plus `.gen` and `.toml` files inside directories, sorted.
pub fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.is_file()
                        && matches!(f.extension().and_then(|e| e.to_str()), Some("gen" | "toml"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}
