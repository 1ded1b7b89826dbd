//! Jobs: a command tag, a context header and `name = value` bindings, read
//! either from flags or from a job file.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Clone, Debug, Default)]
pub struct Job {
    pub command: String,
    pub context: Option<String>,
    /// Repeated names are allowed; matrices take one binding per row.
    pub bindings: Vec<(String, String)>,
    pub format: Format,
}

#[derive(Debug)]
pub struct JobError(pub String);

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Job {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.bindings.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, name: &str) -> Result<&str, JobError> {
        self.get(name)
            .ok_or_else(|| JobError(format!("`{}` needs a value for `{name}`", self.command)))
    }

    pub fn all(&self, name: &str) -> Vec<&str> {
        self.bindings.iter().filter(|(k, _)| k == name).map(|(_, v)| v.as_str()).collect()
    }

    /// Bindings from `other` replace every binding of the same name.
    pub fn override_with(&mut self, other: Vec<(String, String)>) {
        for (k, _) in &other {
            self.bindings.retain(|(name, _)| name != k);
        }
        self.bindings.extend(other);
    }
}

/// Parses a job file:
///
/// ```text
/// # comment
/// command construct-ode
/// vars t; unknowns u
/// factors = 1; t
/// H = u
/// ```
///
/// The command line and the context header are optional; a header is any
/// line starting with `vars`.
pub fn parse_job_file(text: &str) -> Result<Job, JobError> {
    let mut job = Job::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("command ") {
            job.command = rest.trim().to_owned();
        } else if line.starts_with("vars ") {
            job.context = Some(line.to_owned());
        } else if let Some((k, v)) = line.split_once('=') {
            let k = k.trim();
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(JobError(format!("line {}: bad binding name `{k}`", n + 1)));
            }
            job.bindings.push((k.to_owned(), v.trim().to_owned()));
        } else {
            return Err(JobError(format!("line {}: expected `name = expression`", n + 1)));
        }
    }
    Ok(job)
}
