#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxlab_core::plot::{parse_plot_csv, render_svg, PlotKind};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(curves) = parse_plot_csv(text) {
        for kind in [PlotKind::LogLog, PlotKind::Linear, PlotKind::Overdamping] {
            if let Ok(svg) = render_svg(&curves, kind, "fuzz") {
                assert!(svg.ends_with("</svg>\n"));
            }
        }
    }
});
