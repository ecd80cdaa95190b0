#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stbcmud/analysis.hpp"
#include "stbcmud/harness.hpp"
#include "stbcmud/stcodes.hpp"

namespace py = pybind11;
using namespace stbcmud;

namespace {

std::vector<std::vector<cx>> to_nested(const ComplexMat& m) {
    std::vector<std::vector<cx>> out(m.rows(), std::vector<cx>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

std::vector<AlamoutiBlock> to_blocks(const std::vector<std::pair<cx, cx>>& pairs) {
    std::vector<AlamoutiBlock> blocks;
    blocks.reserve(pairs.size());
    for (const auto& [a, b] : pairs) blocks.push_back(AlamoutiBlock{a, b});
    return blocks;
}

}  // namespace

PYBIND11_MODULE(_stbcmud, m) {
    m.doc() = "Multi-user space-time-block-code detection simulator and numerical verifier";
    m.attr("__version__") = kVersion;

    m.def(
        "constellation_points",
        [](const std::string& name, double rotation) {
            return Constellation::by_name(name, rotation).points;
        },
        py::arg("name"), py::arg("rotation") = 0.0);

    m.def(
        "alamouti_encode",
        [](const std::vector<cx>& symbols) {
            SymbolVector v{{}, symbols, 0};
            return to_nested(alamouti_encode(v));
        },
        py::arg("symbols"));

    m.def(
        "qostbc_encode",
        [](const std::vector<cx>& symbols, double rotation) {
            SymbolVector v{{}, symbols, 0};
            return to_nested(qostbc_encode(v, rotation));
        },
        py::arg("symbols"), py::arg("rotation"));

    m.def(
        "effective_snr_ap",
        [](const std::vector<std::pair<cx, cx>>& h, const std::vector<std::pair<cx, cx>>& g,
           double sigma_sq) {
            const EffectiveSnrBreakdown b = effective_snr_ap(to_blocks(h), to_blocks(g), sigma_sq);
            py::dict d;
            d["snr_ap"] = b.snr_ap;
            d["h_norm_sq"] = b.h_norm_sq;
            d["g_norm_sq"] = b.g_norm_sq;
            d["lambda_norm_sq"] = b.lambda_norm_sq;
            d["sigma_sq"] = b.sigma_sq;
            d["numerator_form"] = b.numerator_form;
            return d;
        },
        py::arg("h"), py::arg("g"), py::arg("sigma_sq"));

    m.def(
        "chi_square_statistic",
        [](const std::vector<std::pair<cx, cx>>& h, const std::vector<std::pair<cx, cx>>& g) {
            return chi_square_statistic(to_blocks(h), to_blocks(g));
        },
        py::arg("h"), py::arg("g"));

    m.def(
        "lemma1_residual",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return lemma1_residual(RealChannelDecomposition{a, b});
        },
        py::arg("a"), py::arg("b"));

    m.def("lemma3_roots", &lemma3_roots, py::arg("betas"));

    m.def(
        "lemma2_verify",
        [](const std::vector<double>& b_extended, std::size_t m_rx) {
            const SpectralCertificate c = lemma2_verify(b_extended, m_rx);
            py::dict d;
            d["betas"] = c.betas;
            d["lambda_stars"] = c.lambda_stars;
            d["s_values"] = c.s_values;
            d["eig_residual"] = c.eig_residual;
            d["orth_residual"] = c.orth_residual;
            d["diag_residual"] = c.diag_residual;
            d["min_eigenvalue"] = c.min_eigenvalue;
            return d;
        },
        py::arg("b_extended"), py::arg("m_rx"));

    m.def(
        "channel_correlation",
        [](const std::vector<double>& b_extended, std::size_t m_rx) {
            const ComplexMat c = channel_correlation_C(b_extended, m_rx);
            std::vector<std::vector<double>> out(c.rows(), std::vector<double>(c.cols()));
            for (std::size_t i = 0; i < c.rows(); ++i)
                for (std::size_t j = 0; j < c.cols(); ++j) out[i][j] = c(i, j).real();
            return out;
        },
        py::arg("b_extended"), py::arg("m_rx"));

    m.def("det_c_closed_form", &det_c_closed_form, py::arg("b_extended"), py::arg("m_rx") = 3);

    m.def(
        "run_ber",
        [](const std::string& config_json) {
            return record_to_json_text(run_ber(config_from_json_text(config_json)));
        },
        py::arg("config_json"), "Runs a BER simulation; takes and returns JSON text.");

    m.def(
        "run_outage",
        [](const std::string& config_json) {
            return record_to_json_text(run_outage(config_from_json_text(config_json)));
        },
        py::arg("config_json"), "Runs an outage estimation; takes and returns JSON text.");

    m.def(
        "run_verify",
        [](const std::string& suite, std::uint64_t seed) {
            const VerifyReport r = run_verify(suite, seed);
            py::list entries;
            for (const VerifyEntry& e : r.entries) {
                py::dict d;
                d["name"] = e.name;
                d["value"] = e.value;
                d["threshold"] = e.threshold;
                d["pass"] = e.pass;
                entries.append(d);
            }
            return entries;
        },
        py::arg("suite"), py::arg("seed") = 1);
}
