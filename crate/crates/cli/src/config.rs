//! Flat `key=value` manifests, merged in front of the command-line flags.

use std::fs;
use std::path::Path;

/// Flag tokens for the entries of a manifest.
///
/// Keys are flag names without the leading dashes; `_` and `-` are
/// interchangeable. Blank lines and lines starting with `#` are skipped.
/// `true` and `false` toggle switches such as `timing`.
pub fn parse_manifest(text: &str, origin: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{origin}:{}: expected key=value, got `{line}`", n + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("{origin}:{}: empty key", n + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

/// Removes `--config PATH` from `argv` and splices the manifest entries
/// right after the subcommand, so later command-line flags override them.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            match it.next() {
                Some(p) => path = Some(p),
                None => return Err("--config needs a file path".into()),
            }
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| format!("--config: cannot read {path}: {e}"))?;
    let entries = parse_manifest(&text, &path)?;
    // argv[0] is the program, argv[1] the subcommand
    let at = rest.len().min(2);
    rest.splice(at..at, entries);
    Ok(rest)
}
