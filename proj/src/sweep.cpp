#include "bykov/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace bykov {

void SweepSpec::validate() const {
    if (n1 < 2 || n2 < 2) throw InvalidParameter("sweep grid needs n1, n2 >= 2");
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(tau1_lo) || !in_unit(tau1_hi) || !in_unit(tau2_lo) || !in_unit(tau2_hi)) {
        throw InvalidParameter("sweep tau ranges must lie within [0, 1]");
    }
    if (!(tau1_lo < tau1_hi) || !(tau2_lo < tau2_hi)) {
        throw InvalidParameter("sweep ranges need lo < hi");
    }
    (void)ModelParams(alpha, beta, omega, tau1_lo, tau2_lo, kappa);
    if (!x0.allFinite()) throw InvalidParameter("sweep x0 must be finite");
    lyapunov.validate(integrator);
}

double SweepSpec::tau1(int i) const {
    if (i == n1 - 1) return tau1_hi;
    return tau1_lo + (tau1_hi - tau1_lo) * static_cast<double>(i) / static_cast<double>(n1 - 1);
}

double SweepSpec::tau2(int j) const {
    if (j == n2 - 1) return tau2_hi;
    return tau2_lo + (tau2_hi - tau2_lo) * static_cast<double>(j) / static_cast<double>(n2 - 1);
}

ModelParams SweepSpec::params(int i, int j) const {
    return {alpha, beta, omega, tau1(i), tau2(j), kappa};
}

std::string to_string(CellClass c) {
    switch (c) {
        case CellClass::Red:
            return "red";
        case CellClass::Blue:
            return "blue";
        case CellClass::Yellow:
            return "yellow";
        case CellClass::Gray:
            return "gray";
    }
    return "?";
}

CellClass cell_class_from_string(const std::string& s) {
    if (s == "red") return CellClass::Red;
    if (s == "blue") return CellClass::Blue;
    if (s == "yellow") return CellClass::Yellow;
    if (s == "gray") return CellClass::Gray;
    throw ParseError("unknown class '" + s + "'", 0);
}

Rgb cell_color(CellClass c) {
    switch (c) {
        case CellClass::Red:
            return {255, 0, 0};
        case CellClass::Blue:
            return {0, 0, 255};
        case CellClass::Yellow:
            return {255, 255, 0};
        case CellClass::Gray:
            return {128, 128, 128};
    }
    return {0, 0, 0};
}

CellClass cell_class_from_color(const Rgb& rgb) {
    for (CellClass c : {CellClass::Red, CellClass::Blue, CellClass::Yellow, CellClass::Gray}) {
        if (cell_color(c) == rgb) return c;
    }
    throw ParseError("color does not encode a class", 0);
}

SweepGrid::SweepGrid(SweepSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    cells_.resize(static_cast<std::size_t>(spec_.n1) * static_cast<std::size_t>(spec_.n2));
}

std::size_t SweepGrid::index(int i, int j) const {
    if (i < 0 || i >= spec_.n1 || j < 0 || j >= spec_.n2) {
        throw std::out_of_range("sweep cell index out of range");
    }
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(spec_.n1) +
           static_cast<std::size_t>(i);
}

std::size_t SweepGrid::done_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](const SweepCell& c) { return c.done; }));
}

SweepCell compute_cell(const SweepSpec& spec, int i, int j) {
    SweepCell cell;
    cell.done = true;
    auto record = [&cell](const SpectrumResult& r) {
        cell.exponents = r.exponents;
        cell.radial = r.radial_exponent;
    };
    try {
        const SpectrumResult r = spectrum(spec.params(i, j), spec.x0, spec.lyapunov, spec.integrator);
        record(r);
        const AttractorClass c = classify_exponents(r.exponents, spec.lyapunov.zero_tol);
        cell.nonneg = c.nonneg_count;
        if (!r.converged) {
            cell.cls = CellClass::Gray;
        } else if (c.label == AttractorLabel::FixedPoint) {
            cell.cls = CellClass::Red;
        } else if (c.label == AttractorLabel::LimitCycle) {
            cell.cls = CellClass::Blue;
        } else {
            cell.cls = CellClass::Yellow;
        }
    } catch (const RadialAnomaly& e) {
        record(e.result());
        cell.cls = CellClass::Gray;
    } catch (const Error&) {
        cell.cls = CellClass::Gray;
    }
    return cell;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::array<std::string, 10> kColumns = {"i",       "j",       "tau1",   "tau2",   "lambda1",
                                              "lambda2", "lambda3", "radial", "nonneg", "class"};

double parse_double(const std::string& s, std::size_t line, const std::string& col) {
    const char* b = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(b, &end);
    if (s.empty() || end != b + s.size()) {
        throw ParseError("column '" + col + "': not a number: '" + s + "'", line);
    }
    return v;
}

int parse_int(const std::string& s, std::size_t line, const std::string& col) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("column '" + col + "': not an integer: '" + s + "'", line);
    }
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct ParsedRow {
    std::size_t line;
    int i, j;
    double tau1, tau2;
    SweepCell cell;
};

std::vector<ParsedRow> parse_rows(std::istream& is) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line)) throw ParseError("empty sweep CSV", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (std::find(header.begin(), header.end(), kColumns[k]) == header.end()) {
            throw ParseError("missing column '" + kColumns[k] + "'", 1);
        }
        if (k >= header.size() || header[k] != kColumns[k]) {
            throw ParseError("column '" + kColumns[k] + "' out of order", 1);
        }
    }
    if (header.size() != kColumns.size()) throw ParseError("unexpected extra columns", 1);

    std::vector<ParsedRow> rows;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != kColumns.size()) {
            throw ParseError("expected " + std::to_string(kColumns.size()) + " fields, got " +
                                 std::to_string(f.size()),
                             lineno);
        }
        ParsedRow r;
        r.line = lineno;
        r.i = parse_int(f[0], lineno, "i");
        r.j = parse_int(f[1], lineno, "j");
        r.tau1 = parse_double(f[2], lineno, "tau1");
        r.tau2 = parse_double(f[3], lineno, "tau2");
        for (int k = 0; k < 3; ++k) {
            r.cell.exponents[static_cast<std::size_t>(k)] =
                parse_double(f[4 + k], lineno, kColumns[4 + k]);
        }
        r.cell.radial = parse_double(f[7], lineno, "radial");
        r.cell.nonneg = parse_int(f[8], lineno, "nonneg");
        try {
            r.cell.cls = cell_class_from_string(f[9]);
        } catch (const ParseError& e) {
            throw ParseError(std::string("column 'class': ") + e.what(), lineno);
        }
        r.cell.done = true;
        rows.push_back(r);
    }
    return rows;
}

SweepGrid fill_grid(const std::vector<ParsedRow>& rows, const SweepSpec& spec) {
    SweepGrid grid(spec);
    for (const auto& r : rows) {
        const std::size_t lineno = r.line;
        if (r.i < 0 || r.i >= spec.n1 || r.j < 0 || r.j >= spec.n2) {
            throw ParseError("cell (" + std::to_string(r.i) + ", " + std::to_string(r.j) +
                                 ") lies outside the grid",
                             lineno);
        }
        if (r.tau1 != spec.tau1(r.i) || r.tau2 != spec.tau2(r.j)) {
            throw ParseError("tau values do not match the grid geometry", lineno);
        }
        grid.cell(r.i, r.j) = r.cell;
    }
    return grid;
}

}  // namespace

std::string sweep_csv_header() {
    std::string h;
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (k) h += ',';
        h += kColumns[k];
    }
    return h;
}

std::string sweep_csv_row(const SweepGrid& grid, int i, int j) {
    const SweepCell& c = grid.cell(i, j);
    std::string row = std::to_string(i) + ',' + std::to_string(j) + ',' +
                      format_double(grid.spec().tau1(i)) + ',' +
                      format_double(grid.spec().tau2(j));
    for (double l : c.exponents) row += ',' + format_double(l);
    row += ',' + format_double(c.radial) + ',' + std::to_string(c.nonneg) + ',' + to_string(c.cls);
    return row;
}

void grid_to_csv(const SweepGrid& grid, std::ostream& os) {
    os << sweep_csv_header() << '\n';
    for (int j = 0; j < grid.n2(); ++j) {
        for (int i = 0; i < grid.n1(); ++i) {
            if (grid.cell(i, j).done) os << sweep_csv_row(grid, i, j) << '\n';
        }
    }
}

void grid_to_csv(const SweepGrid& grid, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    grid_to_csv(grid, os);
    if (!os) throw Error("write failed: " + path.string());
}

SweepGrid csv_to_grid(std::istream& is, const SweepSpec& spec) {
    return fill_grid(parse_rows(is), spec);
}

SweepGrid csv_to_grid(const std::filesystem::path& path, const SweepSpec& spec) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return csv_to_grid(is, spec);
}

SweepGrid csv_to_grid(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    const auto rows = parse_rows(is);
    if (rows.empty()) throw ParseError("sweep CSV has no rows", 0);
    SweepSpec spec;
    int max_i = 0, max_j = 0;
    for (const auto& r : rows) {
        max_i = std::max(max_i, r.i);
        max_j = std::max(max_j, r.j);
    }
    spec.n1 = max_i + 1;
    spec.n2 = max_j + 1;
    for (const auto& r : rows) {
        if (r.i == 0) spec.tau1_lo = r.tau1;
        if (r.i == max_i) spec.tau1_hi = r.tau1;
        if (r.j == 0) spec.tau2_lo = r.tau2;
        if (r.j == max_j) spec.tau2_hi = r.tau2;
    }
    return fill_grid(rows, spec);
}

SweepGrid run_sweep(const SweepSpec& spec, int workers,
                    const std::optional<std::filesystem::path>& resume_from,
                    const SweepOptions& options) {
    if (workers < 1) throw InvalidParameter("workers must be >= 1");
    SweepGrid grid = resume_from ? csv_to_grid(*resume_from, spec) : SweepGrid(spec);

    std::vector<std::pair<int, int>> pending;
    for (int j = 0; j < grid.n2(); ++j) {
        for (int i = 0; i < grid.n1(); ++i) {
            if (!grid.cell(i, j).done) pending.emplace_back(i, j);
        }
    }

    std::ofstream sink;
    if (options.checkpoint) {
        const bool fresh = !std::filesystem::exists(*options.checkpoint) ||
                           std::filesystem::file_size(*options.checkpoint) == 0;
        sink.open(*options.checkpoint, std::ios::binary | std::ios::app);
        if (!sink) throw Error("cannot open checkpoint " + options.checkpoint->string());
        if (fresh) sink << sweep_csv_header() << '\n' << std::flush;
    }

    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            const auto [i, j] = pending[k];
            SweepCell cell = compute_cell(spec, i, j);
            std::lock_guard lock(sink_mutex);
            grid.cell(i, j) = cell;
            if (sink.is_open()) sink << sweep_csv_row(grid, i, j) << '\n' << std::flush;
            if (options.progress) options.progress(i, j, cell);
        }
    };

    const int n_threads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(1, pending.size())));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    return grid;
}

void render_grid(const SweepGrid& grid, std::ostream& os) {
    os << "P6\n" << grid.n1() << ' ' << grid.n2() << "\n255\n";
    std::string payload;
    payload.reserve(static_cast<std::size_t>(grid.n1() * grid.n2() * 3));
    for (int row = 0; row < grid.n2(); ++row) {
        const int j = grid.n2() - 1 - row;
        for (int i = 0; i < grid.n1(); ++i) {
            const SweepCell& c = grid.cell(i, j);
            const Rgb rgb = c.done ? cell_color(c.cls) : Rgb{0, 0, 0};
            payload.push_back(static_cast<char>(rgb.r));
            payload.push_back(static_cast<char>(rgb.g));
            payload.push_back(static_cast<char>(rgb.b));
        }
    }
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

void render_grid(const SweepGrid& grid, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    render_grid(grid, os);
    if (!os) throw Error("write failed: " + path.string());
}

}  // namespace bykov
