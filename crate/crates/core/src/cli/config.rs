//! Run configuration: a TOML document with dotted-key overrides.
//!
//! Numbers may be written as TOML integers or as decimal strings; rationals
//! (`suite.lambda`) as strings such as `"1/3"`.

use std::path::{Path, PathBuf};

use toml::Value;

use crate::characters::{make_character, CharTable, FiniteCharacterPair, HeckeCharacterData, InfinityType};
use crate::error::{Error, Result};
use crate::field_ctx::arith::Q;
use crate::field_ctx::CMContext;
use crate::local_factors::EulerContext;
use crate::schwartz_p::{MuTuple, PartitionData};

const DEFAULTS: &str = r#"
[field]
D = 1
p = 5
c = 1
M = 4

[series]
n = 1
k = 4
nu = 0
d = 0
B = 6
b = 1

[character]
chi1 = [1, 0]
chi2 = [1, 0]

[suite]
route = "G"
lambda = "2"
m = 2
samples = 100
seed = 0
e = -1
beta = 2
ell = 2
"#;

#[derive(Clone, Debug)]
pub struct Config {
    root: Value,
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Table(a), Value::Table(b)) => {
            for (k, v) in b {
                match a.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        a.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

fn parse_literal(s: &str) -> Value {
    let wrapped = format!("x = {s}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").unwrap_or_else(|| Value::String(s.into())),
        Err(_) => Value::String(s.into()),
    }
}

impl Config {
    pub fn defaults() -> Self {
        Config { root: Value::Table(DEFAULTS.parse().expect("built-in defaults parse")) }
    }

    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut cfg = Self::defaults();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge(&mut cfg.root, &Value::Table(table));
        }
        for s in sets {
            cfg.set(s)?;
        }
        Ok(cfg)
    }

    /// Apply one `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {assignment:?}")))?;
        let path: Vec<&str> = key.trim().split('.').collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("bad key {key:?}")));
        }
        let mut cur = &mut self.root;
        for part in &path[..path.len() - 1] {
            let table = cur.as_table_mut().ok_or_else(|| Error::Config(format!("{key} is not a table path")))?;
            cur = table.entry(part.to_string()).or_insert_with(|| Value::Table(Default::default()));
        }
        let table = cur.as_table_mut().ok_or_else(|| Error::Config(format!("{key} is not a table path")))?;
        table.insert(path[path.len() - 1].to_string(), parse_literal(value.trim()));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Value> {
        key.split('.').try_fold(&self.root, |v, part| v.get(part))
    }

    pub fn int(&self, key: &str) -> Result<i64> {
        match self.get(key) {
            Some(Value::Integer(i)) => Ok(*i),
            Some(Value::String(s)) => s.trim().parse().map_err(|_| Error::Config(format!("{key} = {s:?} is not an integer"))),
            Some(v) => Err(Error::Config(format!("{key} = {v} is not an integer"))),
            None => Err(Error::Config(format!("missing {key}"))),
        }
    }

    pub fn uint(&self, key: &str) -> Result<u64> {
        let v = self.int(key)?;
        u64::try_from(v).map_err(|_| Error::Config(format!("{key} = {v} must be nonnegative")))
    }

    pub fn string(&self, key: &str) -> Result<String> {
        match self.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Integer(i)) => Ok(i.to_string()),
            Some(v) => Err(Error::Config(format!("{key} = {v} is not a string"))),
            None => Err(Error::Config(format!("missing {key}"))),
        }
    }

    pub fn rational(&self, key: &str) -> Result<Q> {
        let s = self.string(key)?;
        s.trim().parse().map_err(|_| Error::Config(format!("{key} = {s:?} is not a rational")))
    }

    fn int_list(&self, key: &str) -> Result<Vec<i64>> {
        match self.get(key) {
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) => Ok(*i),
                    Value::String(s) => s.trim().parse().map_err(|_| Error::Config(format!("{key}: {s:?}"))),
                    _ => Err(Error::Config(format!("{key}: {v} is not an integer"))),
                })
                .collect(),
            Some(v) => Err(Error::Config(format!("{key} = {v} is not a list"))),
            None => Err(Error::Config(format!("missing {key}"))),
        }
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        if let Ok(dir) = std::env::var("EML_CACHE_DIR") {
            if !dir.is_empty() {
                return Some(dir.into());
            }
        }
        self.string("cache.dir").ok().map(PathBuf::from)
    }

    /// The parameter set as canonical JSON, used for cache keys.
    pub fn canonical(&self) -> String {
        serde_json::to_string(&self.root).expect("toml values serialize")
    }
}

fn parse_char(pair: &[i64], p: u64, c: u32, key: &str) -> Result<u64> {
    let phi = (p - 1) * p.pow(c - 1);
    match pair {
        [order, exp] if *order > 0 && phi % *order as u64 == 0 => {
            Ok((exp.rem_euclid(*order) as u64) * (phi / *order as u64))
        }
        _ => Err(Error::Config(format!("{key}: expected [order, exponent] with order dividing {phi}"))),
    }
}

impl Config {
    pub fn ctx(&self) -> Result<CMContext> {
        let c = u32::try_from(self.uint("field.c")?).map_err(|_| Error::Config("field.c too large".into()))?;
        let m = u32::try_from(self.uint("field.M")?).map_err(|_| Error::Config("field.M too large".into()))?;
        CMContext::new(self.uint("field.D")?, self.uint("field.p")?, c, m)
    }

    pub fn euler(&self, ctx: &CMContext) -> Result<EulerContext> {
        EulerContext::new(self.uint("series.b")?, ctx)
    }

    pub fn n(&self) -> Result<usize> {
        let n = self.uint("series.n")? as usize;
        if n == 0 {
            return Err(Error::Config("series.n must be positive".into()));
        }
        Ok(n)
    }

    pub fn bound(&self) -> Result<u64> {
        let b = self.uint("series.B")?;
        if b == 0 {
            return Err(Error::Config("series.B must be at least 1".into()));
        }
        Ok(b)
    }

    pub fn part(&self) -> Result<PartitionData> {
        let n = self.n()?;
        if self.get("series.parts").is_none() {
            return Ok(PartitionData::ones(n));
        }
        let parts: Vec<usize> = self.int_list("series.parts")?.into_iter().map(|x| x.max(0) as usize).collect();
        let part = PartitionData::new(parts)?;
        if part.n != n {
            return Err(Error::Config(format!("series.parts sums to {}, not n = {n}", part.n)));
        }
        Ok(part)
    }

    pub fn inf(&self) -> Result<InfinityType> {
        Ok(InfinityType::new(self.int("series.k")?, self.int("series.nu")?))
    }

    pub fn twist(&self) -> Result<u32> {
        u32::try_from(self.uint("series.d")?).map_err(|_| Error::Config("series.d too large".into()))
    }

    pub fn chi(&self, ctx: &CMContext) -> Result<HeckeCharacterData> {
        let e1 = parse_char(&self.int_list("character.chi1")?, ctx.p, ctx.c, "character.chi1")?;
        let e2 = parse_char(&self.int_list("character.chi2")?, ctx.p, ctx.c, "character.chi2")?;
        make_character(self.inf()?, FiniteCharacterPair::from_exponents(ctx.p, ctx.c, e1, e2), ctx)
    }

    /// `character.mu`: one `[order, exponent]` per block; trivial if absent.
    pub fn mu(&self, ctx: &CMContext, part: &PartitionData) -> Result<MuTuple> {
        let Some(Value::Array(items)) = self.get("character.mu") else {
            return Ok(MuTuple::trivial(ctx.p, ctx.c, part.r()));
        };
        let mut chars = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let key = format!("character.mu[{i}]");
            let pair: Vec<i64> = item
                .as_array()
                .ok_or_else(|| Error::Config(format!("{key} is not a list")))?
                .iter()
                .map(|v| v.as_integer().ok_or_else(|| Error::Config(format!("{key}: not an integer"))))
                .collect::<Result<_>>()?;
            chars.push(CharTable::from_exponent(ctx.p, ctx.c, parse_char(&pair, ctx.p, ctx.c, &key)?));
        }
        if chars.len() != part.r() {
            return Err(Error::Config(format!("character.mu has {} entries for {} blocks", chars.len(), part.r())));
        }
        MuTuple::new(chars)
    }
}
