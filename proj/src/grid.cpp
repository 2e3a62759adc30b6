#include "slag/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace slag {

GridDomain::GridDomain(int n, std::array<double, 3> lo, std::array<double, 3> hi,
                       std::array<int, 3> resolution)
    : n_(n), lo_(lo), hi_(hi), res_(resolution) {
    if (n != 2 && n != 3) {
        throw DomainError("GridDomain supports n = 2 or 3");
    }
    for (int a = 0; a < n; ++a) {
        const auto ia = static_cast<size_t>(a);
        if (res_[ia] < 5) {
            throw DomainError("GridDomain needs at least 5 nodes per axis");
        }
        if (!(hi_[ia] > lo_[ia])) {
            throw DomainError("GridDomain needs hi > lo per axis");
        }
        h_[ia] = (hi_[ia] - lo_[ia]) / (res_[ia] - 1);
    }
    for (int a = n; a < 3; ++a) {
        const auto ia = static_cast<size_t>(a);
        res_[ia] = 1;
        lo_[ia] = hi_[ia] = 0.0;
        h_[ia] = 0.0;
    }
}

GridDomain GridDomain::square(double lo, double hi, int res) {
    return GridDomain(2, {lo, lo, 0.0}, {hi, hi, 0.0}, {res, res, 1});
}

GridDomain GridDomain::rect2(double lox, double hix, double loy, double hiy,
                             int resx, int resy) {
    return GridDomain(2, {lox, loy, 0.0}, {hix, hiy, 0.0}, {resx, resy, 1});
}

GridDomain GridDomain::cube(double lo, double hi, int res) {
    return GridDomain(3, {lo, lo, lo}, {hi, hi, hi}, {res, res, res});
}

double GridDomain::max_spacing() const {
    double h = 0.0;
    for (int a = 0; a < n_; ++a) {
        h = std::max(h, spacing(a));
    }
    return h;
}

long GridDomain::node_count() const {
    long c = 1;
    for (int a = 0; a < n_; ++a) {
        c *= res(a);
    }
    return c;
}

long GridDomain::index(int i, int j, int k) const {
    if (n_ == 2) {
        return static_cast<long>(i) * res(1) + j;
    }
    return (static_cast<long>(i) * res(1) + j) * res(2) + k;
}

bool GridDomain::is_boundary(int i, int j, int k) const {
    if (i == 0 || i == res(0) - 1 || j == 0 || j == res(1) - 1) {
        return true;
    }
    return n_ == 3 && (k == 0 || k == res(2) - 1);
}

bool GridDomain::is_interior(int i, int j, int k, int margin) const {
    if (i < margin || i >= res(0) - margin || j < margin || j >= res(1) - margin) {
        return false;
    }
    if (n_ == 3 && (k < margin || k >= res(2) - margin)) {
        return false;
    }
    return true;
}

bool GridDomain::operator==(const GridDomain& other) const {
    if (n_ != other.n_) {
        return false;
    }
    for (int a = 0; a < n_; ++a) {
        if (res(a) != other.res(a) || lo(a) != other.lo(a) || hi(a) != other.hi(a)) {
            return false;
        }
    }
    return true;
}

ScalarFieldGrid::ScalarFieldGrid(GridDomain domain)
    : domain_(std::move(domain)),
      values_(static_cast<size_t>(domain_.node_count()), 0.0) {}

ScalarFieldGrid ScalarFieldGrid::sample2(const GridDomain& domain,
                                         const std::function<double(double, double)>& f) {
    if (domain.dim() != 2) {
        throw DomainError("sample2 needs a 2D domain");
    }
    ScalarFieldGrid u(domain);
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            u.at(i, j) = f(domain.coord(0, i), domain.coord(1, j));
        }
    }
    return u;
}

ScalarFieldGrid ScalarFieldGrid::sample3(
    const GridDomain& domain, const std::function<double(double, double, double)>& f) {
    if (domain.dim() != 3) {
        throw DomainError("sample3 needs a 3D domain");
    }
    ScalarFieldGrid u(domain);
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            for (int k = 0; k < domain.res(2); ++k) {
                u.at(i, j, k) = f(domain.coord(0, i), domain.coord(1, j), domain.coord(2, k));
            }
        }
    }
    return u;
}

double ScalarFieldGrid::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(item);
    }
    return out;
}

} // namespace

std::string grid_header_line(const GridDomain& d) {
    std::ostringstream os;
    os.precision(17);
    os << "# n=" << d.dim() << " res=";
    for (int a = 0; a < d.dim(); ++a) {
        os << (a ? "," : "") << d.res(a);
    }
    os << " bounds=";
    for (int a = 0; a < d.dim(); ++a) {
        os << (a ? "," : "") << d.lo(a) << ":" << d.hi(a);
    }
    os << " mask=";
    if (d.mask()) {
        os << "annulus:" << d.mask()->r2min << "," << d.mask()->r2max;
    } else {
        os << "none";
    }
    return os.str();
}

GridDomain parse_grid_header(const std::string& line) {
    // # n=<n> res=<r1,r2> bounds=<lo1:hi1,lo2:hi2> mask=<none|annulus:a,b>
    std::map<std::string, std::string> kv;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) {
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
    }
    if (!kv.count("n") || !kv.count("res") || !kv.count("bounds")) {
        throw DomainError("grid file: malformed header: " + line);
    }
    const int n = std::stoi(kv["n"]);
    const auto res_s = split(kv["res"], ',');
    const auto bounds_s = split(kv["bounds"], ',');
    if (static_cast<int>(res_s.size()) != n || static_cast<int>(bounds_s.size()) != n) {
        throw DomainError("grid file: header dimension mismatch");
    }
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    std::array<int, 3> res{1, 1, 1};
    for (int a = 0; a < n; ++a) {
        res[static_cast<size_t>(a)] = std::stoi(res_s[static_cast<size_t>(a)]);
        const auto lh = split(bounds_s[static_cast<size_t>(a)], ':');
        if (lh.size() != 2) {
            throw DomainError("grid file: malformed bounds");
        }
        lo[static_cast<size_t>(a)] = std::stod(lh[0]);
        hi[static_cast<size_t>(a)] = std::stod(lh[1]);
    }
    GridDomain d(n, lo, hi, res);
    if (kv.count("mask") && kv["mask"] != "none" && !kv["mask"].empty()) {
        const auto ms = kv["mask"];
        if (ms.rfind("annulus:", 0) != 0) {
            throw DomainError("grid file: unknown mask kind " + ms);
        }
        const auto parts = split(ms.substr(8), ',');
        if (parts.size() != 2) {
            throw DomainError("grid file: malformed annulus mask");
        }
        d.set_mask(AnnulusMask{std::stod(parts[0]), std::stod(parts[1])});
    }
    return d;
}

void ScalarFieldGrid::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) {
        throw InternalError("cannot open " + path + " for writing");
    }
    f.precision(17);
    f << grid_header_line(domain_) << "\n";
    for (double v : values_) {
        f << v << "\n";
    }
}

ScalarFieldGrid ScalarFieldGrid::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw DomainError("cannot open grid file " + path);
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw DomainError("empty grid file " + path);
    }
    ScalarFieldGrid u(parse_grid_header(line));
    for (auto& v : u.values_) {
        if (!(f >> v)) {
            throw DomainError("grid file " + path + ": too few values");
        }
    }
    return u;
}

void ScalarFieldGrid::write_json(const std::string& path) const {
    nlohmann::json j;
    j["n"] = domain_.dim();
    j["res"] = std::vector<int>{};
    j["bounds"] = nlohmann::json::array();
    for (int a = 0; a < domain_.dim(); ++a) {
        j["res"].push_back(domain_.res(a));
        j["bounds"].push_back({domain_.lo(a), domain_.hi(a)});
    }
    if (domain_.mask()) {
        j["mask"] = {{"r2min", domain_.mask()->r2min}, {"r2max", domain_.mask()->r2max}};
    } else {
        j["mask"] = nullptr;
    }
    j["values"] = values_;
    std::ofstream f(path);
    if (!f) {
        throw InternalError("cannot open " + path + " for writing");
    }
    f << j.dump(2) << "\n";
}

ScalarFieldGrid ScalarFieldGrid::read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw DomainError("cannot open grid file " + path);
    }
    nlohmann::json j;
    f >> j;
    const int n = j.at("n").get<int>();
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    std::array<int, 3> res{1, 1, 1};
    for (int a = 0; a < n; ++a) {
        res[static_cast<size_t>(a)] = j.at("res").at(a).get<int>();
        lo[static_cast<size_t>(a)] = j.at("bounds").at(a).at(0).get<double>();
        hi[static_cast<size_t>(a)] = j.at("bounds").at(a).at(1).get<double>();
    }
    GridDomain d(n, lo, hi, res);
    if (j.contains("mask") && !j.at("mask").is_null()) {
        d.set_mask(AnnulusMask{j.at("mask").at("r2min").get<double>(),
                               j.at("mask").at("r2max").get<double>()});
    }
    ScalarFieldGrid u(d);
    const auto vals = j.at("values").get<std::vector<double>>();
    if (vals.size() != u.values_.size()) {
        throw DomainError("grid json " + path + ": value count mismatch");
    }
    u.values_ = vals;
    return u;
}

ScalarFieldGrid ScalarFieldGrid::read(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        return read_json(path);
    }
    return read_csv(path);
}

VectorFieldGrid::VectorFieldGrid(GridDomain domain)
    : domain_(std::move(domain)),
      values_(static_cast<size_t>(domain_.node_count()) * domain_.dim(), 0.0) {}

VectorFieldGrid VectorFieldGrid::sample2(
    const GridDomain& domain,
    const std::function<std::array<double, 2>(double, double)>& f) {
    if (domain.dim() != 2) {
        throw DomainError("sample2 needs a 2D domain");
    }
    VectorFieldGrid v(domain);
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            const auto val = f(domain.coord(0, i), domain.coord(1, j));
            v.at(i, j, 0) = val[0];
            v.at(i, j, 1) = val[1];
        }
    }
    return v;
}

VectorFieldGrid VectorFieldGrid::sample3(
    const GridDomain& domain,
    const std::function<std::array<double, 3>(double, double, double)>& f) {
    if (domain.dim() != 3) {
        throw DomainError("sample3 needs a 3D domain");
    }
    VectorFieldGrid v(domain);
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            for (int k = 0; k < domain.res(2); ++k) {
                const auto val =
                    f(domain.coord(0, i), domain.coord(1, j), domain.coord(2, k));
                for (int c = 0; c < 3; ++c) {
                    v.at3(i, j, k, c) = val[static_cast<size_t>(c)];
                }
            }
        }
    }
    return v;
}

VectorFieldGrid VectorFieldGrid::gradient_of(const ScalarFieldGrid& u) {
    const GridDomain& d = u.domain();
    if (d.dim() != 2) {
        throw DomainError("gradient_of implemented for 2D grids");
    }
    VectorFieldGrid g(d);
    const double hx = d.spacing(0);
    const double hy = d.spacing(1);
    const int nx = d.res(0);
    const int ny = d.res(1);
    auto dx = [&](int i, int j) {
        if (i == 0) {
            return (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * hx);
        }
        if (i == nx - 1) {
            return (3.0 * u.at(nx - 1, j) - 4.0 * u.at(nx - 2, j) + u.at(nx - 3, j)) /
                   (2.0 * hx);
        }
        return (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * hx);
    };
    auto dy = [&](int i, int j) {
        if (j == 0) {
            return (-3.0 * u.at(i, 0) + 4.0 * u.at(i, 1) - u.at(i, 2)) / (2.0 * hy);
        }
        if (j == ny - 1) {
            return (3.0 * u.at(i, ny - 1) - 4.0 * u.at(i, ny - 2) + u.at(i, ny - 3)) /
                   (2.0 * hy);
        }
        return (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * hy);
    };
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            g.at(i, j, 0) = dx(i, j);
            g.at(i, j, 1) = dy(i, j);
        }
    }
    return g;
}

void VectorFieldGrid::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) {
        throw InternalError("cannot open " + path + " for writing");
    }
    f.precision(17);
    f << grid_header_line(domain_) << "\n";
    const int n = domain_.dim();
    const long count = domain_.node_count();
    for (long node = 0; node < count; ++node) {
        for (int c = 0; c < n; ++c) {
            f << (c ? "," : "") << values_[static_cast<size_t>(node * n + c)];
        }
        f << "\n";
    }
}

VectorFieldGrid VectorFieldGrid::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw DomainError("cannot open grid file " + path);
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw DomainError("empty grid file " + path);
    }
    VectorFieldGrid v(parse_grid_header(line));
    const int n = v.domain_.dim();
    const long count = v.domain_.node_count();
    for (long node = 0; node < count; ++node) {
        if (!std::getline(f, line)) {
            throw DomainError("grid file " + path + ": too few rows");
        }
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != n) {
            throw DomainError("grid file " + path + ": bad column count");
        }
        for (int c = 0; c < n; ++c) {
            v.values_[static_cast<size_t>(node * n + c)] = std::stod(cells[static_cast<size_t>(c)]);
        }
    }
    return v;
}

} // namespace slag
