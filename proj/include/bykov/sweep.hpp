#pragma once

// (tau1, tau2) parameter-plane classification by Lyapunov spectrum.

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bykov/integrate.hpp"
#include "bykov/lyapunov.hpp"
#include "bykov/model.hpp"

namespace bykov {

struct SweepSpec {
    double tau1_lo = 0.0, tau1_hi = 0.6;
    int n1 = 40;
    double tau2_lo = 0.0, tau2_hi = 0.6;
    int n2 = 40;
    double alpha = 1.0, beta = -0.1, omega = 1.0, kappa = 0.0;
    Vec4d x0{0.1, 0.1, 0.0, -0.99};
    LyapunovSettings lyapunov;
    IntegratorConfig integrator;

    void validate() const;
    double tau1(int i) const;
    double tau2(int j) const;
    ModelParams params(int i, int j) const;
};

/// Gray marks a cell whose spectrum failed (blowup, radial anomaly, or no convergence).
enum class CellClass { Red, Blue, Yellow, Gray };

std::string to_string(CellClass c);
CellClass cell_class_from_string(const std::string& s);
Rgb cell_color(CellClass c);
CellClass cell_class_from_color(const Rgb& rgb);

struct SweepCell {
    bool done = false;
    std::array<double, 3> exponents{std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN()};
    double radial = std::numeric_limits<double>::quiet_NaN();
    int nonneg = -1;
    CellClass cls = CellClass::Gray;
};

/// Cells indexed by (i, j): i along tau1, j along tau2. Geometry is fixed at creation.
class SweepGrid {
public:
    explicit SweepGrid(SweepSpec spec);

    const SweepSpec& spec() const { return spec_; }
    int n1() const { return spec_.n1; }
    int n2() const { return spec_.n2; }
    SweepCell& cell(int i, int j) { return cells_.at(index(i, j)); }
    const SweepCell& cell(int i, int j) const { return cells_.at(index(i, j)); }
    std::size_t done_count() const;
    bool complete() const { return done_count() == cells_.size(); }

private:
    std::size_t index(int i, int j) const;
    SweepSpec spec_;
    std::vector<SweepCell> cells_;
};

/// Spectrum + classification of one grid point. Failures become Gray cells.
SweepCell compute_cell(const SweepSpec& spec, int i, int j);

struct SweepOptions {
    /// Rows are appended here (with a header when the file is new) as cells finish.
    std::optional<std::filesystem::path> checkpoint;
    /// Called once per finished cell, serialized with checkpoint writes.
    std::function<void(int i, int j, const SweepCell&)> progress;
};

/// Computes every cell not already present in resume_from on a pool of
/// `workers` threads. The result does not depend on workers or scheduling.
SweepGrid run_sweep(const SweepSpec& spec, int workers,
                    const std::optional<std::filesystem::path>& resume_from = std::nullopt,
                    const SweepOptions& options = {});

/// Header `i,j,tau1,tau2,lambda1,lambda2,lambda3,radial,nonneg,class`.
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepGrid& grid, int i, int j);

/// Done cells sorted by (tau2, tau1), 17 significant digits.
void grid_to_csv(const SweepGrid& grid, std::ostream& os);
void grid_to_csv(const SweepGrid& grid, const std::filesystem::path& path);

/// Loads rows into a grid with the given geometry; rows may be partial and unordered.
/// Throws ParseError (with line number) on malformed input or rows off the grid.
SweepGrid csv_to_grid(std::istream& is, const SweepSpec& spec);
SweepGrid csv_to_grid(const std::filesystem::path& path, const SweepSpec& spec);
/// Infers n1, n2 and the tau ranges from the rows (intended for complete files).
SweepGrid csv_to_grid(const std::filesystem::path& path);

/// Binary PPM (P6), width n1, height n2, top row = largest tau2.
/// Cells not yet computed are black.
void render_grid(const SweepGrid& grid, std::ostream& os);
void render_grid(const SweepGrid& grid, const std::filesystem::path& path);

}  // namespace bykov
