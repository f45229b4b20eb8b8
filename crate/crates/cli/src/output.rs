//! Artifacts of one command and where they go.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Table {
    pub name: &'static str,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, headers: &[&'static str]) -> Self {
        Table { name, headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Everything a command produced.
pub struct Output {
    pub slug: String,
    pub command: &'static str,
    /// Human-readable summary.
    pub text: String,
    /// Print `text` rather than the tables on stdout.
    pub text_primary: bool,
    pub tables: Vec<Table>,
    pub json: Value,
    pub svgs: Vec<(&'static str, String)>,
    /// Extra files written verbatim under the output directory.
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
}

impl Output {
    pub fn new(slug: &str, command: &'static str) -> Self {
        Output {
            slug: slugify(slug),
            command,
            text: String::new(),
            text_primary: false,
            tables: Vec::new(),
            json: Value::Null,
            svgs: Vec::new(),
            files: Vec::new(),
            exit_code: 0,
        }
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

/// `affine(-1)` becomes `affine_-1`.
pub fn slugify(name: &str) -> String {
    let s: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect();
    let s = s.trim_matches('_');
    if s.is_empty() {
        "scenario".into()
    } else {
        s.into()
    }
}

pub fn num(v: f64) -> String {
    // -0 and 0 print the same
    format!("{}", v + 0.0)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_file(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| CliError::output(&path, e))?;
    written.push(path);
    Ok(())
}

/// Write to `dir` when given; otherwise put the primary output on stdout
/// and the summary on stderr.
pub fn emit(out: &Output, dir: Option<&Path>, format: Format, svg: bool) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    let Some(dir) = dir else {
        if svg && !out.svgs.is_empty() {
            return Err(CliError::schema("--svg needs an output directory (--out or outputs.dir)"));
        }
        let body = match format {
            Format::Json => serde_json::to_string_pretty(&out.json).expect("json values serialize") + "\n",
            Format::Csv if out.text_primary => out.text.clone(),
            Format::Csv => {
                let mut b = String::new();
                for (i, t) in out.tables.iter().enumerate() {
                    if out.tables.len() > 1 {
                        if i > 0 {
                            b.push('\n');
                        }
                        b.push_str(&format!("# {}\n", t.name));
                    }
                    b.push_str(&t.to_csv());
                }
                b
            }
        };
        so.write_all(body.as_bytes()).map_err(|e| CliError::output(Path::new("<stdout>"), e))?;
        if !(format == Format::Csv && out.text_primary) {
            eprint!("{}", out.text);
        }
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            for t in &out.tables {
                write_file(dir, &format!("{}_{}.csv", out.slug, t.name), &t.to_csv(), &mut written)?;
            }
        }
        Format::Json => {
            let body = serde_json::to_string_pretty(&out.json).expect("json values serialize") + "\n";
            write_file(dir, &format!("{}_{}.json", out.slug, out.command), &body, &mut written)?;
        }
    }
    if svg {
        for (name, body) in &out.svgs {
            write_file(dir, &format!("{}_{}.svg", out.slug, name), body, &mut written)?;
        }
    }
    for (name, body) in &out.files {
        write_file(dir, name, body, &mut written)?;
    }
    let mut msg = out.text.clone();
    for p in written {
        msg.push_str(&format!("wrote {}\n", p.display()));
    }
    so.write_all(msg.as_bytes()).map_err(|e| CliError::output(Path::new("<stdout>"), e))?;
    Ok(())
}
