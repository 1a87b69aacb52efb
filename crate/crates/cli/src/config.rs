//! `--config file.json`: a JSON object whose entries become command-line
//! flags. A flag given explicitly on the command line replaces the config
//! entry of the same name.
//!
//! Sections (`space`, `frame`, `task`, ...) are flattened. Arrays become one
//! comma-separated value for list flags and repeated flags otherwise, `true`
//! becomes a bare switch, and `space.kind` maps to `--space`.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context};
use clap::CommandFactory;
use serde_json::Value;

use crate::Cli;

fn take_config(args: &mut Vec<OsString>) -> anyhow::Result<Option<OsString>> {
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" {
            if i + 1 >= args.len() {
                bail!("--config needs a file");
            }
            let path = args.remove(i + 1);
            args.remove(i);
            return Ok(Some(path));
        }
        if let Some(rest) = a.strip_prefix("--config=") {
            args.remove(i);
            return Ok(Some(OsString::from(rest)));
        }
        i += 1;
    }
    Ok(None)
}

fn flag_name(section: Option<&str>, key: &str) -> String {
    match (section, key) {
        (Some("space"), "kind") => "space".into(),
        _ => key.replace('_', "-"),
    }
}

fn scalar(v: &Value) -> anyhow::Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => bail!("unsupported config value {other}"),
    })
}

fn push_entry(out: &mut Vec<(String, Option<Vec<String>>)>, name: String, v: &Value) -> anyhow::Result<()> {
    match v {
        Value::Bool(false) | Value::Null => {}
        Value::Bool(true) => out.push((name, None)),
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<anyhow::Result<Vec<_>>>()?;
            out.push((name, Some(parts)));
        }
        _ => out.push((name, Some(vec![scalar(v)?]))),
    }
    Ok(())
}

/// Flags described by a config file, in file order.
pub fn config_flags(path: &Path) -> anyhow::Result<Vec<(String, Option<Vec<String>>)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let root: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = root else {
        bail!("config must be a JSON object");
    };
    let mut out = Vec::new();
    for (key, v) in &map {
        match v {
            Value::Object(section) => {
                for (k, v) in section {
                    push_entry(&mut out, flag_name(Some(key), k), v)?;
                }
            }
            _ => push_entry(&mut out, flag_name(None, key), v)?,
        }
    }
    Ok(out)
}

/// Replaces `--config FILE` by the flags it describes that the chosen
/// subcommand accepts.
pub fn expand(mut args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = take_config(&mut args)? else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(pos) = args.iter().position(|a| names.iter().any(|n| a.to_str() == Some(n))) else {
        bail!("--config needs a subcommand");
    };
    let sub = cmd
        .find_subcommand(args[pos].to_str().unwrap_or_default())
        .expect("subcommand exists");
    let accepted: Vec<(String, bool)> = sub
        .get_arguments()
        .filter_map(|a| Some((a.get_long()?.to_string(), a.get_value_delimiter().is_some())))
        .collect();
    let explicit: Vec<String> = args[pos + 1..]
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra = Vec::new();
    for (name, value) in config_flags(Path::new(&path))? {
        if explicit.contains(&name) {
            continue;
        }
        let Some(&(_, delimited)) = accepted.iter().find(|a| a.0 == name) else {
            log::warn!("config entry {name:?} does not apply to {}", sub.get_name());
            continue;
        };
        let flag = OsString::from(format!("--{name}"));
        match value {
            None => extra.push(flag),
            Some(values) if delimited => extra.extend([flag, values.join(",").into()]),
            Some(values) => {
                for v in values {
                    extra.extend([flag.clone(), v.into()]);
                }
            }
        }
    }
    args.splice(pos + 1..pos + 1, extra);
    Ok(args)
}
