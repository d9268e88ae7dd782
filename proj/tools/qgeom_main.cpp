// qgeom command-line tool: Bloch-band quantum geometry, curve tracing and
// Gauss-Bonnet reports.

#include <CLI11.hpp>

#include "qgeom/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"quantum geometry of Bloch-band eigenprojector manifolds"};
    app.require_subcommand(1);
    app.fallthrough();

    qgeom::RunConfig cfg;
    app.add_option("--model", cfg.model_path, "model file (JSON); default: built-in two-band, m0 = 1");
    app.add_option("--grid", cfg.grid_n, "grid points per axis")->capture_default_str();
    app.add_option("--curve-samples", cfg.curve_n, "samples on the singular curve")
        ->capture_default_str();
    app.add_option("--band", cfg.band, "band selection: lower | upper | comma list")
        ->capture_default_str();
    app.add_option("--out", cfg.out_path, "output path (default: stdout)");
    app.add_flag("--experimental-general-c", cfg.experimental_general_c,
                 "evaluate the conjectural bookkeeping for C != 1");

    auto* fields = app.add_subcommand("fields", "per-k CSV of det g, lambda_bar, K_G");
    auto* chern = app.add_subcommand("chern", "Chern number with quantization residual");
    auto* volume = app.add_subcommand("volume", "quantum volume report (JSON)");
    auto* curve = app.add_subcommand("singular-curve", "traced singular curve CSV");
    auto* gb = app.add_subcommand("gauss-bonnet", "generalized Gauss-Bonnet report (JSON)");
    auto* validate = app.add_subcommand("validate", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    using Cmd = qgeom::RunConfig::Command;
    if (fields->parsed()) cfg.command = Cmd::Fields;
    if (chern->parsed()) cfg.command = Cmd::Chern;
    if (volume->parsed()) cfg.command = Cmd::Volume;
    if (curve->parsed()) cfg.command = Cmd::SingularCurve;
    if (gb->parsed()) cfg.command = Cmd::GaussBonnet;
    if (validate->parsed()) cfg.command = Cmd::Validate;

    return qgeom::run(cfg);
}
