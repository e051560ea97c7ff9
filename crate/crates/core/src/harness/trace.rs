use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::oracle::CurvatureModel;
use crate::solver::{RunMeta, StopReason, TraceRow};

/// Run parameters stored as `# key=value` lines at the top of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub problem: String,
    pub setup: String,
    pub epsilon: f64,
    pub delta_u: f64,
    pub delta_pu: f64,
    pub l0: f64,
    pub seed: u64,
    pub psi_x0: Option<f64>,
    pub psi_star: Option<f64>,
    pub curvature: Option<CurvatureModel>,
    pub stop_reason: Option<StopReason>,
    pub k_out: Option<usize>,
}

impl TraceMeta {
    pub fn run_meta(&self) -> RunMeta {
        RunMeta {
            epsilon: self.epsilon,
            delta_u: self.delta_u,
            delta_pu: self.delta_pu,
            l0: self.l0,
            psi_x0: self.psi_x0,
            psi_star: self.psi_star,
            curvature: self.curvature,
        }
    }
}

/// A trace: metadata plus one row per accepted iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRow>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

impl TraceFile {
    pub fn to_csv_string(&self) -> Result<String> {
        let m = &self.meta;
        let mut head = String::new();
        let lines = [
            ("problem", m.problem.clone()),
            ("setup", m.setup.clone()),
            ("epsilon", format!("{:?}", m.epsilon)),
            ("delta_u", format!("{:?}", m.delta_u)),
            ("delta_pu", format!("{:?}", m.delta_pu)),
            ("l0", format!("{:?}", m.l0)),
            ("seed", m.seed.to_string()),
            ("psi_x0", opt_f64(m.psi_x0)),
            ("psi_star", opt_f64(m.psi_star)),
            ("curvature", opt(&m.curvature)),
            ("stop_reason", m.stop_reason.map_or("none", StopReason::name).to_string()),
            ("k_out", opt(&m.k_out)),
        ];
        for (k, v) in lines {
            writeln!(head, "# {k}={v}").expect("writing to a String");
        }
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(COLUMNS)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        head.push_str(std::str::from_utf8(&body).expect("csv output is UTF-8"));
        Ok(head)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = std::collections::BTreeMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata line '{line}'")))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&str> {
            pairs.get(k).map(String::as_str).ok_or_else(|| Error::Parse(format!("trace lacks '{k}'")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse::<f64>().map_err(|_| Error::Parse(format!("bad number for '{k}'")))
        };
        let opt_num = |k: &str| -> Result<Option<f64>> {
            match get(k)? {
                "none" => Ok(None),
                s => s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number for '{k}'"))),
            }
        };
        let meta = TraceMeta {
            problem: get("problem")?.to_string(),
            setup: get("setup")?.to_string(),
            epsilon: num("epsilon")?,
            delta_u: num("delta_u")?,
            delta_pu: num("delta_pu")?,
            l0: num("l0")?,
            seed: get("seed")?.parse().map_err(|_| Error::Parse("bad seed".into()))?,
            psi_x0: opt_num("psi_x0")?,
            psi_star: opt_num("psi_star")?,
            curvature: match get("curvature")? {
                "none" => None,
                s => Some(s.parse()?),
            },
            stop_reason: match get("stop_reason")? {
                "none" => None,
                s => Some(StopReason::from_name(s).ok_or_else(|| Error::Parse(format!("bad stop reason '{s}'")))?),
            },
            k_out: match get("k_out")? {
                "none" => None,
                s => Some(s.parse().map_err(|_| Error::Parse("bad k_out".into()))?),
            },
        };
        if !(meta.epsilon > 0.0 && meta.l0 > 0.0) {
            return Err(Error::Parse("epsilon and l0 must be positive".into()));
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.iter().ne(COLUMNS) {
            return Err(Error::Parse(format!("unexpected trace columns: {}", header.iter().collect::<Vec<_>>().join(","))));
        }
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
        for (i, r) in rows.iter().enumerate() {
            if r.k != i || r.i_k == 0 || !(r.m_k > 0.0) || !r.gmap_norm.is_finite() {
                return Err(Error::Parse(format!("inconsistent trace row {i}")));
            }
        }
        Ok(TraceFile { meta, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut s = String::new();
        std::fs::File::open(path)?.read_to_string(&mut s)?;
        if s.trim().is_empty() {
            return Err(Error::Parse(format!("{} is empty", path.display())));
        }
        Self::parse(&s)
    }
}

/// Trace columns in file order.
pub const COLUMNS: [&str; 9] = [
    "k",
    "i_k",
    "M_k",
    "delta_c_k",
    "f_tilde_x",
    "f_tilde_w",
    "gmap_norm",
    "oracle_calls_cum",
    "prox_calls_cum",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::HolderParams;

    fn sample() -> TraceFile {
        TraceFile {
            meta: TraceMeta {
                problem: "quad-cos".into(),
                setup: "euclidean".into(),
                epsilon: 1e-4,
                delta_u: 0.0,
                delta_pu: 3e-7,
                l0: 1.0,
                seed: 7,
                psi_x0: Some(2.345678901234567),
                psi_star: None,
                curvature: Some(CurvatureModel::Holder(HolderParams { nu: 1.0 / 3.0, l_nu: 2.1 })),
                stop_reason: Some(StopReason::CriterionMet),
                k_out: Some(1),
            },
            rows: vec![
                TraceRow {
                    k: 0,
                    i_k: 3,
                    m_k: 4.0,
                    delta_c_k: 1e-4 / 80.0,
                    f_tilde_x: 0.1 + 0.2,
                    f_tilde_w: -1e-300,
                    gmap_norm: 1.0 / 3.0,
                    oracle_calls_cum: 6,
                    prox_calls_cum: 3,
                },
                TraceRow {
                    k: 1,
                    i_k: 1,
                    m_k: 2.0,
                    delta_c_k: 2.5e-6,
                    f_tilde_x: 123456.789,
                    f_tilde_w: 5e-324,
                    gmap_norm: 0.0,
                    oracle_calls_cum: 8,
                    prox_calls_cum: 4,
                },
            ],
        }
    }

    #[test]
    fn round_trips_bit_for_bit() {
        let t = sample();
        let s = t.to_csv_string().unwrap();
        let back = TraceFile::parse(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv_string().unwrap(), s);
        let header = s.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, COLUMNS.join(","));
    }

    #[test]
    fn empty_trace_keeps_header() {
        let mut t = sample();
        t.rows.clear();
        t.meta.k_out = None;
        t.meta.stop_reason = Some(StopReason::InnerCap);
        let back = TraceFile::parse(&t.to_csv_string().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_traces_are_rejected() {
        let s = sample().to_csv_string().unwrap();
        assert!(TraceFile::parse("").is_err());
        assert!(TraceFile::parse(&s.replace("# epsilon=", "# eps=")).is_err());
        assert!(TraceFile::parse(&s.replace("gmap_norm", "gnorm")).is_err());
        let last = s.lines().last().unwrap();
        assert!(TraceFile::parse(&s.replace(last, "1,1,zero,1,1,1,1,1,1")).is_err());
        assert!(TraceFile::parse(&s.replace(last, &last.replacen("1,", "5,", 1))).is_err());
    }
}
