/** @file mpatch_io.cpp

    @brief Plain-text multipatch format.

    @code
    mpatch v1 <d> <npatches>
    patch <k>
    knots <p> <m> <k_0> ... <k_{m-1}>        (u direction)
    knots <p> <m> <k_0> ... <k_{m-1}>        (v direction)
    grid <n_u> <n_v>
    <n_v lines of n_u * d coordinates>
    ...
    interfaces <n>
    <patch_a> <side_a> <patch_b> <side_b> <reversed>
    boundaries <n>
    <patch> <side>
    @endcode

    Reals are written with 17 significant digits, so a write/read cycle is
    bit-exact.
*/

#include "mpiga/multipatch.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mpiga {

namespace {

void expect(std::istream& is, const std::string& word)
{
    std::string tok;
    if (!(is >> tok) || tok != word)
        throw GeometryError("mpatch: expected '" + word + "', got '" + tok + "'");
}

template <class T>
T read_value(std::istream& is, const char* what)
{
    T v;
    if (!(is >> v))
        throw GeometryError(std::string("mpatch: failed to read ") + what);
    return v;
}

void write_knots(std::ostream& os, const BasisSpec1D& b)
{
    os << "knots " << b.degree() << ' ' << b.knots().size();
    for (double k : b.knots())
        os << ' ' << k;
    os << '\n';
}

BasisSpec1D read_knots(std::istream& is)
{
    expect(is, "knots");
    const int p = read_value<int>(is, "degree");
    const auto m = read_value<std::size_t>(is, "knot count");
    std::vector<double> k(m);
    for (double& x : k)
        x = read_value<double>(is, "knot");
    return BasisSpec1D(p, std::move(k));
}

Side to_side(int s)
{
    if (s < 0 || s > 3)
        throw GeometryError("mpatch: side index out of range");
    return static_cast<Side>(s);
}

} // namespace

void write_mpatch(std::ostream& os, const MultiPatch& mp)
{
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    os << "mpatch v1 " << mp.dim() << ' ' << mp.patches.size() << '\n';
    for (std::size_t k = 0; k < mp.patches.size(); ++k)
    {
        const Patch& p = mp.patches[k];
        os << "patch " << k << '\n';
        write_knots(os, p.basis.u);
        write_knots(os, p.basis.v);
        const Index nu = p.basis.u.size(), nv = p.basis.v.size();
        os << "grid " << nu << ' ' << nv << '\n';
        for (Index j = 0; j < nv; ++j)
        {
            for (Index i = 0; i < nu; ++i)
                for (int d = 0; d < p.dim(); ++d)
                    os << (i == 0 && d == 0 ? "" : " ") << p.control_points(p.basis.index(i, j), d);
            os << '\n';
        }
    }
    os << "interfaces " << mp.interfaces.size() << '\n';
    for (const Interface& i : mp.interfaces)
        os << i.patch_a << ' ' << static_cast<int>(i.side_a) << ' ' << i.patch_b << ' '
           << static_cast<int>(i.side_b) << ' ' << (i.reversed ? 1 : 0) << '\n';
    os << "boundaries " << mp.boundaries.size() << '\n';
    for (const BoundarySide& b : mp.boundaries)
        os << b.patch << ' ' << static_cast<int>(b.side) << '\n';
    os.flags(flags);
    os.precision(prec);
}

MultiPatch read_mpatch(std::istream& is)
{
    expect(is, "mpatch");
    expect(is, "v1");
    const int dim = read_value<int>(is, "dimension");
    const int np = read_value<int>(is, "patch count");
    if (dim < 2 || dim > 3 || np < 0)
        throw GeometryError("mpatch: bad header");
    std::vector<Patch> patches;
    for (int k = 0; k < np; ++k)
    {
        expect(is, "patch");
        if (read_value<int>(is, "patch index") != k)
            throw GeometryError("mpatch: patches out of order");
        BasisSpec1D bu = read_knots(is);
        BasisSpec1D bv = read_knots(is);
        expect(is, "grid");
        const auto nu = read_value<Index>(is, "grid size");
        const auto nv = read_value<Index>(is, "grid size");
        if (nu != bu.size() || nv != bv.size())
            throw GeometryError("mpatch: grid does not match knot vectors");
        Patch p{TensorBasisSpec{std::move(bu), std::move(bv)}, Eigen::MatrixXd(nu * nv, dim)};
        for (Index j = 0; j < nv; ++j)
            for (Index i = 0; i < nu; ++i)
                for (int d = 0; d < dim; ++d)
                    p.control_points(p.basis.index(i, j), d) = read_value<double>(is, "coordinate");
        patches.push_back(std::move(p));
    }
    MultiPatch mp = detect_topology(std::move(patches));

    expect(is, "interfaces");
    const int ni = read_value<int>(is, "interface count");
    mp.interfaces.clear();
    for (int k = 0; k < ni; ++k)
    {
        Interface itf;
        itf.patch_a = read_value<int>(is, "patch");
        itf.side_a = to_side(read_value<int>(is, "side"));
        itf.patch_b = read_value<int>(is, "patch");
        itf.side_b = to_side(read_value<int>(is, "side"));
        itf.reversed = read_value<int>(is, "orientation") != 0;
        if (itf.patch_a < 0 || itf.patch_a >= np || itf.patch_b < 0 || itf.patch_b >= np)
            throw GeometryError("mpatch: interface patch index out of range");
        mp.interfaces.push_back(itf);
    }
    expect(is, "boundaries");
    const int nb = read_value<int>(is, "boundary count");
    mp.boundaries.clear();
    for (int k = 0; k < nb; ++k)
    {
        BoundarySide b;
        b.patch = read_value<int>(is, "patch");
        b.side = to_side(read_value<int>(is, "side"));
        if (b.patch < 0 || b.patch >= np)
            throw GeometryError("mpatch: boundary patch index out of range");
        mp.boundaries.push_back(b);
    }
    return mp;
}

void save_mpatch(const std::string& path, const MultiPatch& mp)
{
    std::ofstream os(path);
    if (!os)
        throw GeometryError("cannot open " + path + " for writing");
    write_mpatch(os, mp);
}

MultiPatch load_mpatch(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw GeometryError("cannot open " + path);
    return read_mpatch(is);
}

} // namespace mpiga
