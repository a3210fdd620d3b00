//! Seeded bibliographic datasets: papers, authors, authorship and citations.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const SYNTH_SCHEMA: &str = "\
table paper key=id text=title
table author key=id text=name
table writes key=id
table cites key=id
fk writes.paper -> paper.id
fk writes.author -> author.id
fk cites.citing -> paper.id
fk cites.cited -> paper.id
";

/// A term inserted into paper titles with the given probability.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PlantedTerm {
    pub term: String,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub papers: usize,
    pub authors: usize,
    pub writes: usize,
    pub cites: usize,
    /// Distinct filler words in titles.
    pub vocabulary: usize,
    pub title_words: usize,
    pub planted: Vec<PlantedTerm>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            papers: 1000,
            authors: 300,
            writes: 2000,
            cites: 1500,
            vocabulary: 2000,
            title_words: 6,
            planted: Vec::new(),
        }
    }
}

impl SynthSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocabulary == 0 && self.title_words > 0 {
            return Err(Error::Config("title words need a nonempty vocabulary".into()));
        }
        if (self.writes > 0 && (self.papers == 0 || self.authors == 0)) || (self.cites > 0 && self.papers < 2) {
            return Err(Error::Config("link tables need papers and authors to point at".into()));
        }
        if self.writes > self.papers * self.authors || self.cites > self.papers * (self.papers.saturating_sub(1)) {
            return Err(Error::Config("more distinct links requested than pairs exist".into()));
        }
        for p in &self.planted {
            if !(0.0..=1.0).contains(&p.frequency) {
                return Err(Error::Config(format!("frequency of `{}` not in [0,1]", p.term)));
            }
            if p.term.is_empty() || !p.term.chars().all(char::is_alphanumeric) {
                return Err(Error::Config(format!("planted term `{}` must be alphanumeric", p.term)));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.papers + self.authors + self.writes + self.cites
    }
}

fn distinct_pairs(
    rng: &mut ChaCha8Rng,
    count: usize,
    n: usize,
) -> Vec<(usize, usize)> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pair = (rng.gen_range(0..n), rng.gen_range(0..n));
        if pair.0 != pair.1 && seen.insert(pair) {
            out.push(pair);
        }
    }
    out
}

/// Gives every paper, then every author, one link while links remain; the
/// rest are uniform.
fn authorship(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> Vec<(usize, usize)> {
    let mut seen = HashSet::with_capacity(spec.writes);
    let mut out = Vec::with_capacity(spec.writes);
    let mut add = |pair: (usize, usize), out: &mut Vec<(usize, usize)>| {
        if out.len() < spec.writes && seen.insert(pair) {
            out.push(pair);
        }
    };
    for p in 0..spec.papers {
        let a = rng.gen_range(0..spec.authors.max(1));
        add((p, a), &mut out);
    }
    for a in 0..spec.authors {
        let p = rng.gen_range(0..spec.papers.max(1));
        add((p, a), &mut out);
    }
    while out.len() < spec.writes {
        let pair = (rng.gen_range(0..spec.papers), rng.gen_range(0..spec.authors));
        add(pair, &mut out);
    }
    out
}

/// Writes `schema.txt`, `paper.tsv`, `author.tsv`, `writes.tsv` and
/// `cites.tsv` into `out`. Identical specs produce identical files.
pub fn generate_synthetic(spec: &SynthSpec, out: &Path) -> Result<()> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut paper = String::from("id\ttitle\n");
    for p in 0..spec.papers {
        let mut words: Vec<String> = (0..spec.title_words)
            .map(|_| {
                // squaring skews filler words toward low ids
                let x: f64 = rng.gen();
                format!("w{}", (x * x * spec.vocabulary as f64) as usize)
            })
            .collect();
        for t in &spec.planted {
            if rng.gen_bool(t.frequency) {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, t.term.clone());
            }
        }
        writeln!(paper, "p{p}\t{}", words.join(" ")).expect("string write");
    }

    let mut author = String::from("id\tname\n");
    for a in 0..spec.authors {
        let first = rng.gen_range(0..200);
        let last = rng.gen_range(0..500);
        writeln!(author, "a{a}\tfn{first} ln{last}").expect("string write");
    }

    // row order would otherwise mirror the coverage pass
    let mut pairs = authorship(&mut rng, spec);
    pairs.shuffle(&mut rng);
    let mut writes = String::from("id\tpaper\tauthor\n");
    for (i, (p, a)) in pairs.into_iter().enumerate() {
        writeln!(writes, "w{i}\tp{p}\ta{a}").expect("string write");
    }

    let mut cites = String::from("id\tciting\tcited\n");
    for (i, (a, b)) in distinct_pairs(&mut rng, spec.cites, spec.papers)
        .into_iter()
        .enumerate()
    {
        writeln!(cites, "c{i}\tp{a}\tp{b}").expect("string write");
    }

    for (name, body) in [
        ("schema.txt", SYNTH_SCHEMA),
        ("paper.tsv", paper.as_str()),
        ("author.tsv", author.as_str()),
        ("writes.tsv", writes.as_str()),
        ("cites.tsv", cites.as_str()),
    ] {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
