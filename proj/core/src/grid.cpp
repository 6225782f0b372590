#include "fraclab/grid.hpp"

#include <cstdio>
#include <cstring>

namespace fraclab {

UniformGrid UniformGrid::over(const BBox& box, std::int64_t nodes_per_axis0) {
    if (nodes_per_axis0 < 4) throw Error("grid", "need at least 4 nodes per axis");
    UniformGrid g;
    g.dim = box.dim;
    g.lo = box.lo;
    g.h = box.extent(0) / static_cast<double>(nodes_per_axis0);
    for (int d = 0; d < g.dim; ++d) {
        const double n = box.extent(d) / g.h;
        const auto ni = static_cast<std::int64_t>(std::llround(n));
        if (std::abs(n - static_cast<double>(ni)) > 1e-9 || ni < 4)
            throw Error("grid", "box extents must be commensurate with the spacing");
        g.shape[d] = ni;
    }
    return g;
}

double interpolate(const ScalarField& f, const Point& p) {
    const UniformGrid& g = f.grid;
    // Coordinates in node units; node centers at integer+0.5.
    double u[3] = {0, 0, 0};
    for (int d = 0; d < g.dim; ++d) {
        u[d] = (p[d] - g.lo[d]) / g.h - 0.5;
        if (f.exterior_zero && (u[d] < -1.0 || u[d] > static_cast<double>(g.shape[d]))) return 0.0;
    }
    std::int64_t i[3] = {0, 0, 0};
    double w[3] = {0, 0, 0};
    for (int d = 0; d < g.dim; ++d) {
        double fl = std::floor(u[d]);
        i[d] = static_cast<std::int64_t>(fl);
        w[d] = u[d] - fl;
        if (i[d] < 0) {
            i[d] = 0;
            w[d] = 0.0;
        }
        if (i[d] >= g.shape[d] - 1) {
            i[d] = g.shape[d] - 2;
            w[d] = 1.0;
        }
    }
    auto val = [&](std::int64_t a, std::int64_t b, std::int64_t c) {
        return f.values[g.index(a, b, c)];
    };
    if (g.dim == 2) {
        const double v00 = val(i[0], i[1], 0), v10 = val(i[0] + 1, i[1], 0);
        const double v01 = val(i[0], i[1] + 1, 0), v11 = val(i[0] + 1, i[1] + 1, 0);
        return (1 - w[0]) * (1 - w[1]) * v00 + w[0] * (1 - w[1]) * v10 +
               (1 - w[0]) * w[1] * v01 + w[0] * w[1] * v11;
    }
    double out = 0.0;
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                const double wt = (a ? w[0] : 1 - w[0]) * (b ? w[1] : 1 - w[1]) *
                                  (c ? w[2] : 1 - w[2]);
                out += wt * val(i[0] + a, i[1] + b, i[2] + c);
            }
    return out;
}

NodeMask mask_all(const UniformGrid& g) { return NodeMask(g.size(), 1); }

NodeMask mask_in_domain(const UniformGrid& g, const Domain& U) {
    NodeMask m(g.size(), 0);
    for (std::int64_t i = 0; i < g.size(); ++i) m[i] = U.contains(g.node(i)) ? 1 : 0;
    return m;
}

NodeMask mask_boundary_collar(const UniformGrid& g, const Domain& U, int width) {
    NodeMask m(g.size(), 0);
    const double band = static_cast<double>(width) * g.h;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point p = g.node(i);
        if (U.contains(p) && U.boundary_distance(p) <= band) m[i] = 1;
    }
    return m;
}

NodeMask mask_ball(const UniformGrid& g, const Point& center, double radius) {
    NodeMask m(g.size(), 0);
    const double r2 = radius * radius;
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (dist2(g.node(i), center, g.dim) <= r2) m[i] = 1;
    return m;
}

NodeMask mask_and_not(const NodeMask& a, const NodeMask& b) {
    NodeMask m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = a[i] && !b[i];
    return m;
}

NodeMask mask_or(const NodeMask& a, const NodeMask& b) {
    NodeMask m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = a[i] || b[i];
    return m;
}

std::int64_t mask_count(const NodeMask& m) {
    std::int64_t n = 0;
    for (auto v : m) n += v ? 1 : 0;
    return n;
}

std::vector<std::int64_t> mask_indices(const NodeMask& m) {
    std::vector<std::int64_t> idx;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i]) idx.push_back(static_cast<std::int64_t>(i));
    return idx;
}

namespace {
constexpr char kMagic[8] = {'F', 'R', 'L', 'B', '0', '0', '0', '1'};
}

void write_field_binary(const ScalarField& f, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("io", "cannot open " + path + " for writing");
    std::fwrite(kMagic, 1, 8, fp);
    const std::int32_t dim = f.grid.dim;
    const std::int32_t ext = f.exterior_zero ? 1 : 0;
    std::fwrite(&dim, sizeof dim, 1, fp);
    std::fwrite(&ext, sizeof ext, 1, fp);
    std::fwrite(f.grid.shape.data(), sizeof(std::int64_t), 3, fp);
    std::fwrite(&f.grid.h, sizeof(double), 1, fp);
    std::fwrite(f.grid.lo.data(), sizeof(double), 3, fp);
    std::fwrite(f.values.data(), sizeof(double), f.values.size(), fp);
    std::fclose(fp);
}

ScalarField read_field_binary(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw Error("io", "cannot open " + path);
    char magic[8];
    if (std::fread(magic, 1, 8, fp) != 8 || std::memcmp(magic, kMagic, 8) != 0) {
        std::fclose(fp);
        throw Error("io", path + " is not a field file");
    }
    ScalarField f;
    std::int32_t dim = 0, ext = 0;
    bool ok = std::fread(&dim, sizeof dim, 1, fp) == 1 && std::fread(&ext, sizeof ext, 1, fp) == 1;
    f.grid.dim = dim;
    f.exterior_zero = ext != 0;
    ok = ok && std::fread(f.grid.shape.data(), sizeof(std::int64_t), 3, fp) == 3;
    ok = ok && std::fread(&f.grid.h, sizeof(double), 1, fp) == 1;
    ok = ok && std::fread(f.grid.lo.data(), sizeof(double), 3, fp) == 3;
    if (!ok || dim < 2 || dim > 3) {
        std::fclose(fp);
        throw Error("io", "corrupt field file " + path);
    }
    f.values.resize(f.grid.size());
    ok = std::fread(f.values.data(), sizeof(double), f.values.size(), fp) == f.values.size();
    std::fclose(fp);
    if (!ok) throw Error("io", "truncated field file " + path);
    return f;
}

void write_field_csv(const ScalarField& f, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw Error("io", "cannot open " + path + " for writing");
    std::fprintf(fp, f.grid.dim == 2 ? "i,j,value\n" : "i,j,k,value\n");
    for (std::int64_t idx = 0; idx < f.grid.size(); ++idx) {
        std::int64_t i, j, k;
        f.grid.unravel(idx, i, j, k);
        if (f.grid.dim == 2)
            std::fprintf(fp, "%lld,%lld,%.17g\n", static_cast<long long>(i),
                         static_cast<long long>(j), f.values[idx]);
        else
            std::fprintf(fp, "%lld,%lld,%lld,%.17g\n", static_cast<long long>(i),
                         static_cast<long long>(j), static_cast<long long>(k), f.values[idx]);
    }
    std::fclose(fp);
}

}  // namespace fraclab
