use serde::Serialize;
use wsol_core::{combined_loss, loss_value, multilabel_wsol};

use super::{read_data, write_text, Data};
use crate::commands::eval::multilabel_spec;
use crate::config::load_config;
use crate::exit::Outcome;
use crate::LossArgs;

#[derive(Debug, Serialize)]
struct LossOutput {
    value: f64,
    degenerate: bool,
    kinks: usize,
}

pub fn run(args: &LossArgs) -> Outcome<()> {
    let cfg = load_config(args.config.as_deref())?;
    let out = match read_data(&args.data)? {
        Data::Binary(series) => {
            let spec = cfg.loss();
            if let Some(path) = &args.gradient {
                let (v, g) = combined_loss(&series, &spec)?;
                let mut text = String::from("index,gradient,kink\n");
                for (i, gi) in g.values.iter().enumerate() {
                    let kink = g.kinks.binary_search(&i).is_ok();
                    text.push_str(&format!("{i},{gi},{kink}\n"));
                }
                write_text(path, &text)?;
                LossOutput {
                    value: v.value,
                    degenerate: v.degenerate,
                    kinks: g.kinks.len(),
                }
            } else {
                let mut out = LossOutput {
                    value: 0.0,
                    degenerate: false,
                    kinks: 0,
                };
                for c in spec.components() {
                    let v = loss_value(&series, &c.spec)?;
                    out.value += c.beta * v.value;
                    out.degenerate |= v.degenerate;
                }
                out
            }
        }
        Data::Multilabel(data) => {
            let spec = multilabel_spec(&cfg, data.classes());
            let l = multilabel_wsol(&data, &spec)?;
            if let Some(path) = &args.gradient {
                let mut text = String::from("index,class,gradient,kink\n");
                for (j, col) in l.gradient.iter().enumerate() {
                    for (i, gi) in col.iter().enumerate() {
                        let kink = l.kinks.contains(&(j, i));
                        text.push_str(&format!("{i},{},{gi},{kink}\n", j + 1));
                    }
                }
                write_text(path, &text)?;
            }
            LossOutput {
                value: l.value,
                degenerate: l.degenerate,
                kinks: l.kinks.len(),
            }
        }
    };
    println!("{}", serde_json::to_string(&out).expect("serializable"));
    Ok(())
}
