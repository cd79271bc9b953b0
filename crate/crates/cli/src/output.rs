use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use afpp::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Writes result files with a one-line JSON metadata header.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    base: Value,
    started: Instant,
    pub truncated: bool,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, command: &'static str, base: Value) -> Result<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("output directory {}: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            command,
            base,
            started: Instant::now(),
            truncated: false,
            written: Vec::new(),
        })
    }

    pub fn meta(&self, file: &str) -> Value {
        let mut m = json!({
            "tool": "afpp",
            "version": env!("CARGO_PKG_VERSION"),
            "build": env!("AFPP_GIT_DESCRIBE"),
            "command": self.command,
            "file": file,
            "truncated": self.truncated,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
        });
        if let (Value::Object(m), Value::Object(b)) = (&mut m, &self.base) {
            for (k, v) in b {
                m.insert(k.clone(), v.clone());
            }
        }
        m
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// CSV with `# {metadata}` as its first line.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut buf = format!("# {}\n", serde_json::to_string(&self.meta(name))?).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
        }
        let path = self.path(name);
        fs::write(&path, buf)?;
        self.written.push(path);
        Ok(())
    }

    /// JSON document with the metadata under `meta`.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        let mut v = serde_json::to_value(body)?;
        let meta = self.meta(name);
        match &mut v {
            Value::Object(m) => {
                m.insert("meta".into(), meta);
            }
            _ => v = json!({ "meta": meta, "data": v }),
        }
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(&v)? + "\n")?;
        self.written.push(path);
        Ok(())
    }
}

/// Shortest round-trip formatting.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
