use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::batch::AggregateSeries;
use super::csvfmt::format_sig;
use crate::error::Result;
use crate::problems::Sense;

/// Write `generation mean_best optimum` rows to `path` and a gnuplot script
/// next to it (same stem, `.gp` extension) that draws both series.
pub fn emit_plot_data(aggregate: &AggregateSeries, path: &Path) -> Result<()> {
    let mut data = BufWriter::new(fs::File::create(path)?);
    writeln!(data, "# generation mean_best optimum")?;
    for p in &aggregate.points {
        writeln!(
            data,
            "{} {} {}",
            p.generation,
            format_sig(p.mean, 9),
            format_sig(p.optimum, 9)
        )?;
    }
    data.flush()?;

    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot.dat".into());
    let (direction, ylabel) = match aggregate.sense {
        Sense::Maximize => ("maximize", "mean best fitness (higher is better)"),
        Sense::Minimize => ("minimize", "mean best fitness (lower is better)"),
    };
    let mut script = BufWriter::new(fs::File::create(path.with_extension("gp"))?);
    writeln!(script, "# objective: {direction}")?;
    writeln!(script, "set terminal pngcairo size 640,480")?;
    writeln!(script, "set output '{}'", Path::new(&file_name).with_extension("png").display())?;
    writeln!(script, "set xlabel 'generation'")?;
    writeln!(script, "set ylabel '{ylabel}'")?;
    if aggregate.sense == Sense::Minimize {
        writeln!(script, "set logscale y")?;
    }
    writeln!(script, "set key bottom right")?;
    writeln!(
        script,
        "plot '{file_name}' using 1:2 with lines title 'mean best', \\\n     '{file_name}' using 1:3 with lines dashtype 2 title 'optimum'"
    )?;
    script.flush()?;
    Ok(())
}
