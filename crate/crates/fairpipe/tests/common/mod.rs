#![allow(dead_code)]

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UCI_COLUMNS: [&str; 50] = [
    "encounter_id",
    "patient_nbr",
    "race",
    "gender",
    "age",
    "weight",
    "admission_type_id",
    "discharge_disposition_id",
    "admission_source_id",
    "time_in_hospital",
    "payer_code",
    "medical_specialty",
    "num_lab_procedures",
    "num_procedures",
    "num_medications",
    "number_outpatient",
    "number_emergency",
    "number_inpatient",
    "diag_1",
    "diag_2",
    "diag_3",
    "number_diagnoses",
    "max_glu_serum",
    "A1Cresult",
    "metformin",
    "repaglinide",
    "nateglinide",
    "chlorpropamide",
    "glimepiride",
    "acetohexamide",
    "glipizide",
    "glyburide",
    "tolbutamide",
    "pioglitazone",
    "rosiglitazone",
    "acarbose",
    "miglitol",
    "troglitazone",
    "tolazamide",
    "examide",
    "citoglipton",
    "insulin",
    "glyburide-metformin",
    "glipizide-metformin",
    "glimepiride-pioglitazone",
    "metformin-rosiglitazone",
    "metformin-pioglitazone",
    "change",
    "diabetesMed",
    "readmitted",
];

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = options.iter().map(|o| o.1).sum();
    let mut u = rng.random::<f64>() * total;
    for &(v, w) in options {
        if u < w {
            return v;
        }
        u -= w;
    }
    options.last().unwrap().0
}

const AGES: [&str; 10] =
    ["[0-10)", "[10-20)", "[20-30)", "[30-40)", "[40-50)", "[50-60)", "[60-70)", "[70-80)", "[80-90)", "[90-100)"];

/// Synthetic file with the 50 UCI columns and value vocabularies.
///
/// Readmission depends on prior inpatient visits, length of stay and age,
/// with patients under 30 readmitted noticeably more often, so the default
/// age spec is flagged under the four-fifths rule.
pub fn synthetic_uci_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = UCI_COLUMNS.join(",");
    out.push('\n');
    let drug_state = [("No", 0.75), ("Steady", 0.18), ("Up", 0.035), ("Down", 0.035)];
    for i in 0..n {
        let race = pick(
            &mut rng,
            &[("Caucasian", 0.75), ("AfricanAmerican", 0.19), ("Hispanic", 0.02), ("Other", 0.015), ("Asian", 0.006), ("?", 0.02)],
        );
        let gender = pick(&mut rng, &[("Female", 0.54), ("Male", 0.46)]);
        let age_idx = {
            let w = [0.002, 0.007, 0.016, 0.037, 0.095, 0.17, 0.22, 0.256, 0.169, 0.028];
            let mut u = rng.random::<f64>();
            let mut k = 9;
            for (j, p) in w.iter().enumerate() {
                if u < *p {
                    k = j;
                    break;
                }
                u -= p;
            }
            k
        };
        let time: u32 = rng.random_range(1..=14);
        let inpatient: u32 = if rng.random::<f64>() < 0.66 { 0 } else { rng.random_range(1..=6) };
        let emergency: u32 = if rng.random::<f64>() < 0.89 { 0 } else { rng.random_range(1..=4) };
        let outpatient: u32 = if rng.random::<f64>() < 0.83 { 0 } else { rng.random_range(1..=5) };
        let young = age_idx < 3;
        let z = -2.6 + 0.45 * f64::from(inpatient) + 0.15 * f64::from(emergency) + 0.04 * (f64::from(time) - 4.0)
            + if young { 2.2 } else { 0.0 };
        let p = 1.0 / (1.0 + (-z).exp());
        let readmitted = if rng.random::<f64>() < p {
            "<30"
        } else if rng.random::<f64>() < 0.4 {
            ">30"
        } else {
            "NO"
        };
        let mut row = String::new();
        write!(row, "{},{},{race},{gender},{}", 1000 + i, 50_000 + (i * 7919) % (n.max(1) * 3 / 4 + 1), AGES[age_idx])
            .unwrap();
        write!(row, ",{}", if rng.random::<f64>() < 0.97 { "?" } else { "[75-100)" }).unwrap();
        write!(
            row,
            ",{},{},{},{time}",
            rng.random_range(1..=8),
            rng.random_range(1..=28),
            rng.random_range(1..=25)
        )
        .unwrap();
        write!(row, ",{}", pick(&mut rng, &[("?", 0.4), ("MC", 0.32), ("HM", 0.06), ("SP", 0.05), ("BC", 0.05), ("MD", 0.04)]))
            .unwrap();
        write!(
            row,
            ",{}",
            pick(&mut rng, &[("?", 0.49), ("InternalMedicine", 0.14), ("Emergency/Trauma", 0.07), ("Cardiology", 0.05), ("Surgery-General", 0.03)])
        )
        .unwrap();
        write!(
            row,
            ",{},{},{},{outpatient},{emergency},{inpatient}",
            rng.random_range(1..=100),
            rng.random_range(0..=6),
            rng.random_range(1..=60)
        )
        .unwrap();
        for _ in 0..3 {
            if rng.random::<f64>() < 0.01 {
                row.push_str(",?");
            } else {
                write!(row, ",{}", rng.random_range(1..=400)).unwrap();
            }
        }
        write!(row, ",{}", rng.random_range(1..=16)).unwrap();
        write!(row, ",{}", pick(&mut rng, &[("None", 0.95), ("Norm", 0.025), (">200", 0.015), (">300", 0.01)])).unwrap();
        write!(row, ",{}", pick(&mut rng, &[("None", 0.83), ("Norm", 0.05), (">7", 0.04), (">8", 0.08)])).unwrap();
        for _ in 0..23 {
            write!(row, ",{}", pick(&mut rng, &drug_state)).unwrap();
        }
        write!(row, ",{}", pick(&mut rng, &[("Ch", 0.46), ("No", 0.54)])).unwrap();
        write!(row, ",{}", pick(&mut rng, &[("Yes", 0.77), ("No", 0.23)])).unwrap();
        writeln!(row, ",{readmitted}").unwrap();
        out.push_str(&row);
    }
    out
}

/// T10 pattern (privileged 4 of 6 favorable, unprivileged 1 of 4) repeated `copies` times.
pub fn t10_csv(copies: usize) -> String {
    let pattern = [
        ("P", "<30"),
        ("P", "<30"),
        ("P", "<30"),
        ("P", "<30"),
        ("P", "NO"),
        ("P", "NO"),
        ("U", "<30"),
        ("U", "NO"),
        ("U", "NO"),
        ("U", "NO"),
    ];
    let mut out = String::from("id,grp,feat,readmitted\n");
    let mut id = 0;
    for c in 0..copies {
        for (k, (g, y)) in pattern.iter().enumerate() {
            writeln!(out, "{id},{g},{},{y}", (k * 7 + c * 3) % 5).unwrap();
            id += 1;
        }
    }
    out
}

pub const T10_CONFIG: &str = r#"
id_columns = ["id"]
numeric_columns = ["feat"]
mitigation_spec = "grp"

[[group_specs]]
name = "grp"
attribute = "grp"
privileged = { one_of = ["P"] }
unprivileged = { one_of = ["U"] }
favorable_label = 1

[[learners]]
kind = "gbm"
name = "GBM"
hyper = { n_trees = 10, max_depth = 2 }

[[learners]]
kind = "logistic"
name = "LG"
hyper = { max_iters = 200 }
"#;
