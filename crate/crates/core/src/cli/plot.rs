//! gnuplot script text accompanying each CSV table.

use super::config::{Mode, SweepConfig};
use super::run::VERSION;

fn col(header: &[String], name: &str) -> Option<usize> {
    header.iter().position(|h| h == name).map(|i| i + 1)
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn plot_script(cfg: &SweepConfig, csv_name: &str, header: &[String]) -> String {
    let data = quoted(csv_name);
    let png = quoted(&format!("{}.png", csv_name.trim_end_matches(".csv")));
    let mut s = format!(
        "# jjarray {VERSION}, mode {:?}\n\
         set datafile separator \",\"\n\
         set datafile missing \"NaN\"\n\
         set key outside autotitle columnhead\n\
         set terminal pngcairo size 1000,650\n\
         set output {png}\n",
        cfg.mode
    );
    let n_axes = cfg.sweep.len();
    let x = quoted(&header.first().cloned().unwrap_or_default());
    match cfg.mode {
        Mode::Capmat => {
            let c = col(header, "abs_deviation").unwrap_or(5);
            s.push_str("set xlabel \"entry (row-major)\"\nset ylabel \"|numerical - closed form| (1/fF)\"\n");
            s.push_str(&format!("plot {data} using 0:{c} with impulses\n"));
        }
        Mode::LmgScan => {
            let xc = col(header, "eps_over_2j").unwrap_or(1);
            let g = col(header, "gap_over_4j").unwrap_or(2);
            let z = col(header, "sz_mean").unwrap_or(3);
            s.push_str("set xlabel \"epsilon / 2J\"\nset ylabel \"E10 / 4J,  <Sz>/S\"\n");
            s.push_str(&format!(
                "plot {data} using {xc}:{g} with lines, {data} using {xc}:{z} with lines\n"
            ));
        }
        Mode::FitTb => {
            let first = n_axes + 1;
            s.push_str("set ylabel \"GHz\"\n");
            if n_axes == 0 {
                s.push_str(&format!(
                    "plot for [c={first}:{}] {data} using 0:c with points\n",
                    first + 6
                ));
            } else {
                s.push_str(&format!("set xlabel {x}\n"));
                s.push_str(&format!(
                    "plot for [c={}:{}] {data} using 1:c with linespoints\n",
                    first,
                    first + 6
                ));
            }
        }
        Mode::Spectrum | Mode::SweepCharge | Mode::SweepFlux => {
            let e0 = n_axes + 1;
            let last = e0 + cfg.levels - 1;
            let e01 = col(header, "E01").unwrap_or(last + 1);
            s.push_str("set ylabel \"energy (GHz)\"\n");
            match n_axes {
                0 => s.push_str(&format!(
                    "plot for [c={e0}:{last}] {data} using (0):c with points\n"
                )),
                1 => {
                    s.push_str(&format!("set xlabel {x}\n"));
                    s.push_str(&format!(
                        "plot for [c={e0}:{last}] {data} using 1:c with lines\n"
                    ));
                    s.push_str(&format!(
                        "set output {}\nset ylabel \"E01 (GHz)\"\nset logscale y\nplot {data} using 1:{e01} with lines\n",
                        quoted(&format!("{}_e01.png", csv_name.trim_end_matches(".csv")))
                    ));
                }
                _ => {
                    let y = quoted(&header[1]);
                    s.push_str(&format!(
                        "set xlabel {y}\nset ylabel {x}\nset dgrid3d {},{}\nset pm3d map\nsplot {data} using 2:1:{e01} with pm3d\n",
                        cfg.sweep[0].points, cfg.sweep[1].points
                    ));
                }
            }
        }
    }
    s
}
