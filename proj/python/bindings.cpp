#include "kr/dynamics.hpp"
#include "kr/errors.hpp"
#include "kr/phase_diagram.hpp"
#include "kr/topology.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kr;

namespace {

py::array_t<double> eps_array(const BandGrid& g)
{
    py::array_t<double> a({g.grid.n_k, g.grid.n_alpha, g.N});
    auto r = a.mutable_unchecked<3>();
    for (int i = 0; i < g.grid.n_k; ++i)
        for (int j = 0; j < g.grid.n_alpha; ++j)
            for (int b = 0; b < g.N; ++b)
                r(i, j, b) = g.eps_at(i, j)(b);
    return a;
}

py::dict node_dict(const NodeRecord& n)
{
    py::dict d;
    d["id"] = n.id;
    d["gap"] = n.gap;
    d["plaquette"] = py::make_tuple(n.plaquette[0], n.plaquette[1]);
    d["k"] = n.k;
    d["alpha"] = n.alpha;
    d["flux"] = n.flux;
    d["partner"] = n.partner;
    return d;
}

} // namespace

PYBIND11_MODULE(_krotor, m)
{
    m.doc() = "Triple-kicked 3D quantum rotor: Floquet bands, multi-gap topology and dynamics";

    static py::exception<Error> exc(m, "KrotorError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(exc, (std::string(error_name(e.kind())) + ": " + e.what()).c_str());
        }
    });

    py::enum_<Mode>(m, "Mode").value("exact", Mode::exact).value("asymptotic", Mode::asymptotic);
    py::enum_<PulseMapping>(m, "PulseMapping")
        .value("cos2_first", PulseMapping::cos2_first)
        .value("cos_first", PulseMapping::cos_first);
    py::enum_<Gauge>(m, "Gauge").value("symmetric", Gauge::symmetric).value("asymmetric", Gauge::asymmetric);
    py::enum_<GapLabels>(m, "GapLabels").value("sorted", GapLabels::sorted).value("adiabatic", GapLabels::adiabatic);

    py::class_<PulseVector>(m, "PulseVector")
        .def(py::init<>())
        .def(py::init([](double a, double b, double c, double d) { return PulseVector{a, b, c, d}; }), py::arg("P1"),
             py::arg("P2"), py::arg("P3"), py::arg("P4"))
        .def_readwrite("P1", &PulseVector::P1)
        .def_readwrite("P2", &PulseVector::P2)
        .def_readwrite("P3", &PulseVector::P3)
        .def_readwrite("P4", &PulseVector::P4)
        .def("__eq__", [](const PulseVector& a, const PulseVector& b) { return a == b; })
        .def("__repr__", [](const PulseVector& p) {
            return "PulseVector(" + std::to_string(p.P1) + ", " + std::to_string(p.P2) + ", " + std::to_string(p.P3) +
                   ", " + std::to_string(p.P4) + ")";
        });

    py::class_<Convention>(m, "Convention")
        .def(py::init<>())
        .def_readwrite("mapping", &Convention::mapping)
        .def_readwrite("free_phase_multiplier", &Convention::free_phase_multiplier)
        .def_readwrite("keep_constant", &Convention::keep_constant)
        .def_readwrite("quasienergy_sign", &Convention::quasienergy_sign)
        .def("describe", &Convention::describe)
        .def("__repr__", &Convention::describe);
    m.def("literal_convention", &literal_convention);

    py::class_<Protocol>(m, "Protocol")
        .def_static("constant", &Protocol::constant, py::arg("pulses"))
        .def_static("fig1_circle", &Protocol::fig1_circle, py::arg("n_gamma") = 40)
        .def_static("fig3_family", &Protocol::fig3_family, py::arg("beta"))
        .def_static("from_name", &Protocol::from_name)
        .def_readwrite("n_gamma", &Protocol::n_gamma)
        .def_readwrite("cycles", &Protocol::cycles)
        .def_readwrite("beta", &Protocol::beta)
        .def("pulses", &Protocol::pulses, py::arg("alpha"))
        .def("alpha_at", &Protocol::alpha_at)
        .def_property_readonly("name", &Protocol::name);

    m.def("exact_cos_element", &exact_cos_element, py::arg("l_prime"), py::arg("l"));
    m.def("exact_cos2_element", &exact_cos2_element, py::arg("l_prime"), py::arg("l"));
    m.def(
        "real_space_potential",
        [](int l_max, int N, double p_cos, double p_cos2, Mode mode, bool keep_constant) {
            return real_space_potential({l_max, N}, p_cos, p_cos2, mode, keep_constant).entries;
        },
        py::arg("l_max"), py::arg("N"), py::arg("p_cos"), py::arg("p_cos2"), py::arg("mode") = Mode::exact,
        py::arg("keep_constant") = true);
    m.def("bloch_potential", &bloch_potential, py::arg("N"), py::arg("k"), py::arg("p_cos"), py::arg("p_cos2"),
          py::arg("keep_constant") = true);

    m.def(
        "bloch_operator",
        [](int N, double k, const PulseVector& P, const Convention& conv, Gauge gauge) {
            return build_u_tkr_bloch(N, k, 0.0, P, conv, gauge).matrix;
        },
        py::arg("N"), py::arg("k"), py::arg("pulses"), py::arg("convention") = Convention{},
        py::arg("gauge") = Gauge::symmetric);
    m.def(
        "real_space_operator",
        [](int l_max, int N, const PulseVector& P, Mode mode, const Convention& conv) {
            return build_u_tkr_real({l_max, N}, P, mode, conv);
        },
        py::arg("l_max"), py::arg("N"), py::arg("pulses"), py::arg("mode") = Mode::exact,
        py::arg("convention") = Convention{});
    m.def(
        "band_frame",
        [](int N, double k, const PulseVector& P, const Convention& conv) {
            const BandFrame bf = band_frame(build_u_tkr_bloch(N, k, 0.0, P, conv), conv);
            return py::make_tuple(bf.quasienergies, bf.frame, bf.residual_imag);
        },
        py::arg("N"), py::arg("k"), py::arg("pulses"), py::arg("convention") = Convention{},
        "(quasienergies ascending in (-pi, pi], real frame, imaginary residual)");
    m.def("effective_hamiltonian", &effective_hamiltonian, py::arg("U"), py::arg("branch_center") = 0.0);
    m.def("gap_function", &gap_function, py::arg("eps"), py::arg("n"));

    py::class_<BandGrid>(m, "BandGrid")
        .def_readonly("N", &BandGrid::N)
        .def_readonly("max_residual", &BandGrid::max_residual)
        .def_property_readonly("n_k", [](const BandGrid& g) { return g.grid.n_k; })
        .def_property_readonly("n_alpha", [](const BandGrid& g) { return g.grid.n_alpha; })
        .def_property_readonly("eps", &eps_array, "continuity-labelled quasienergies, shape (n_k, n_alpha, N)")
        .def("k", [](const BandGrid& g, int i) { return g.grid.k(i); })
        .def("alpha", [](const BandGrid& g, int j) { return g.grid.alpha(j); })
        .def("frame", [](const BandGrid& g, int i, int j) { return g.frame_at(i, j); });
    m.def(
        "band_grid",
        [](int N, const Protocol& proto, int n_k, int n_alpha, double k_offset, const Convention& conv, int threads) {
            py::gil_scoped_release release;
            return band_grid(N, {n_k, n_alpha, k_offset}, proto, conv, Executor{threads});
        },
        py::arg("N"), py::arg("protocol"), py::arg("n_k") = 64, py::arg("n_alpha") = 64, py::arg("k_offset") = 0.5,
        py::arg("convention") = Convention{}, py::arg("threads") = 0);

    m.def(
        "detect_nodes",
        [](const BandGrid& g) {
            py::list out;
            for (const auto& n : assign_dirac_strings(g, detect_all_nodes(g)).nodes)
                out.append(node_dict(n));
            return out;
        },
        py::arg("grid"), "nodes of every gap, paired by Dirac strings");
    m.def(
        "patch_euler_class",
        [](const BandGrid& g, int i0, int i1, int j0, int j1, int gap) {
            const EulerResult r = patch_euler_class(g, {i0, i1, j0, j1, gap});
            py::dict d;
            d["chi"] = r.chi;
            d["chi_raw"] = r.chi_raw;
            d["curvature_sum"] = r.curvature_sum;
            d["boundary_sum"] = r.boundary_sum;
            d["form"] = r.form;
            return d;
        },
        py::arg("grid"), py::arg("i0"), py::arg("i1"), py::arg("j0"), py::arg("j1"), py::arg("gap") = 1,
        "Euler class of bands (gap, gap+1) on grid points [i0,i1] x [j0,j1]");
    m.def(
        "zak_along_k", [](const BandGrid& g, int band, int j) { return zak_along_k(g, band, j).phase; },
        py::arg("grid"), py::arg("band"), py::arg("j"));
    m.def(
        "zak_along_alpha", [](const BandGrid& g, int band, int i) { return zak_along_alpha(g, band, i).phase; },
        py::arg("grid"), py::arg("band"), py::arg("i"));
    m.def("zak_phases_k", &zak_phases_k, py::arg("N"), py::arg("pulses"), py::arg("n_k") = 200,
          py::arg("convention") = Convention{});
    m.def("zak_label", &zak_label, py::arg("N"), py::arg("pulses"), py::arg("n_k") = 200,
          py::arg("convention") = Convention{});

    m.def(
        "nodal_line_map",
        [](int N, double p1_min, double p1_max, double p4_min, double p4_max, int n1, int n4, int n_k, int threads) {
            PhaseDiagramSpec spec{p1_min, p1_max, p4_min, p4_max, n1, n4, n_k};
            PhaseDiagram pd;
            {
                py::gil_scoped_release release;
                pd = nodal_line_map(N, spec, {}, Executor{threads});
            }
            py::list pts;
            for (const auto& p : pd.points)
                pts.append(py::make_tuple(p.P1, p.P4, p.mingap, line_flags_string(p.flags, N), p.degenerate));
            py::dict counts;
            static const char* kinds[3] = {"k0", "kpi", "generic"};
            for (int gap = 1; gap <= N; ++gap)
                for (int k = 0; k < 3; ++k)
                    counts[py::str("g" + std::to_string(gap) + ":" + kinds[k])] =
                        pd.count(gap, static_cast<LineKind>(k));
            py::dict d;
            d["points"] = pts;
            d["counts"] = counts;
            return d;
        },
        py::arg("N") = 3, py::arg("p1_min") = 0.0, py::arg("p1_max") = 8.0, py::arg("p4_min") = 0.0,
        py::arg("p4_max") = 8.0, py::arg("n1") = 32, py::arg("n4") = 32, py::arg("n_k") = 64, py::arg("threads") = 0);

    m.def(
        "thermal_state", [](double theta, int l_max, int N) { return thermal_state(theta, {l_max, N}); },
        py::arg("theta"), py::arg("l_max") = 201, py::arg("N") = 3);
    m.def(
        "edge_state",
        [](const PulseVector& P, int gap, int l_max, int N, GapLabels labels, int window, Mode mode) {
            EdgeOptions o;
            o.labels = labels;
            o.window = window;
            o.mode = mode;
            const EdgeState es = edge_state(P, {l_max, N}, gap, o);
            py::dict d;
            d["state"] = es.state;
            d["quasienergy"] = es.info.quasienergy;
            d["boundary"] = es.at_l0 ? "l0" : "lmax";
            d["weight"] = es.at_l0 ? es.info.weight_l0 : es.info.weight_lmax;
            return d;
        },
        py::arg("pulses"), py::arg("gap"), py::arg("l_max") = 201, py::arg("N") = 3,
        py::arg("labels") = GapLabels::sorted, py::arg("window") = 0, py::arg("mode") = Mode::exact);
    m.def(
        "evolve",
        [](const RotorState& psi, const Protocol& proto, int l_max, int N, Mode mode) {
            EvolveOptions o;
            o.mode = mode;
            o.keep_populations = false;
            EvolutionTrace tr;
            {
                py::gil_scoped_release release;
                tr = evolve(psi, proto, {l_max, N}, o);
            }
            std::vector<double> l2, norm, tail;
            for (const auto& r : tr.rows) {
                l2.push_back(r.l2);
                norm.push_back(r.norm);
                tail.push_back(r.tail_mass);
            }
            py::dict d;
            d["l2"] = l2;
            d["norm"] = norm;
            d["tail_mass"] = tail;
            d["unreliable"] = tr.unreliable;
            d["final_state"] = tr.final_state;
            return d;
        },
        py::arg("state"), py::arg("protocol"), py::arg("l_max") = 201, py::arg("N") = 3, py::arg("mode") = Mode::exact);
}
