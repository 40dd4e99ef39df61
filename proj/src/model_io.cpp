#include "trendflow/model_io.hpp"

#include <limits>
#include <stdexcept>

#include "trendflow/io_util.hpp"

namespace trendflow {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_double(v[i]));
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = parse_double(arr[i].get<std::string>());
    return v;
}

nlohmann::json domain_to_json(const Domain& domain) {
    nlohmann::json doc;
    nlohmann::json lower = nlohmann::json::array(), upper = nlohmann::json::array();
    for (Eigen::Index i = 0; i < domain.lower.size(); ++i) {
        lower.push_back(format_double(domain.lower[i]));
        upper.push_back(format_double(domain.upper[i]));
    }
    doc["lower"] = lower;
    doc["upper"] = upper;
    doc["escape_margin"] = format_double(domain.escape_margin);
    return doc;
}

Domain domain_from_json(const nlohmann::json& doc) {
    Domain domain;
    domain.lower = vector_from_json(doc.at("lower"));
    domain.upper = vector_from_json(doc.at("upper"));
    domain.escape_margin = parse_double(doc.at("escape_margin").get<std::string>());
    return domain;
}

nlohmann::json scaling_to_json(const ScalingSpec& scaling) {
    nlohmann::json doc;
    nlohmann::json factors = nlohmann::json::array();
    for (double f : scaling.factors) factors.push_back(format_double(f));
    doc["factors"] = factors;
    doc["divisor_ids"] = scaling.divisor_ids;
    doc["adjuster_ids"] = scaling.adjuster_ids;
    return doc;
}

ScalingSpec scaling_from_json(const nlohmann::json& doc) {
    ScalingSpec scaling;
    for (const auto& f : doc.at("factors"))
        scaling.factors.push_back(parse_double(f.get<std::string>()));
    scaling.divisor_ids = doc.at("divisor_ids").get<std::vector<std::string>>();
    scaling.adjuster_ids = doc.at("adjuster_ids").get<std::vector<std::string>>();
    return scaling;
}

nlohmann::json parse_document(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const std::exception& err) {
        throw std::invalid_argument(std::string("malformed model document: ") + err.what());
    }
}

}  // namespace

std::string document_kind(const std::string& document) {
    const nlohmann::json doc = parse_document(document);
    if (!doc.contains("kind")) throw std::invalid_argument("model document has no kind tag");
    return doc.at("kind").get<std::string>();
}

std::string serialize(const PolyVectorField& model, const nlohmann::json& provenance) {
    nlohmann::json doc;
    doc["kind"] = "poly_field";
    doc["dimension"] = model.dimension();
    doc["degree"] = model.degree();
    doc["basis_mode"] =
        model.basis_mode() == BasisMode::FullMultivariate ? "full" : "separable";
    doc["eps"] = vector_to_json(model.eps());
    nlohmann::json components = nlohmann::json::array();
    for (int i = 0; i < model.dimension(); ++i) {
        nlohmann::json terms = nlohmann::json::array();
        for (const Monomial& m : model.component(i)) {
            nlohmann::json term;
            term["exponents"] = m.exponents;
            term["coefficient"] = format_double(m.coeff);
            terms.push_back(term);
        }
        components.push_back(terms);
    }
    doc["components"] = components;
    doc["domain"] = domain_to_json(model.domain());
    doc["scaling"] = model.scaling() ? scaling_to_json(*model.scaling()) : nlohmann::json();
    doc["provenance"] = provenance;
    return doc.dump(2) + "\n";
}

PolyVectorField deserialize_field(const std::string& document) {
    const nlohmann::json doc = parse_document(document);
    if (doc.value("kind", "") != "poly_field")
        throw std::invalid_argument("document is not a poly_field model");

    const int n = doc.at("dimension").get<int>();
    const int degree = doc.at("degree").get<int>();
    const std::string mode_name = doc.at("basis_mode").get<std::string>();
    BasisMode mode;
    if (mode_name == "full")
        mode = BasisMode::FullMultivariate;
    else if (mode_name == "separable")
        mode = BasisMode::Separable;
    else
        throw std::invalid_argument("unknown basis_mode '" + mode_name + "'");

    const Eigen::VectorXd eps = vector_from_json(doc.at("eps"));
    std::vector<std::vector<Monomial>> components;
    for (const auto& terms : doc.at("components")) {
        std::vector<Monomial> comp;
        for (const auto& term : terms) {
            Monomial m;
            m.exponents = term.at("exponents").get<std::vector<int>>();
            m.coeff = parse_double(term.at("coefficient").get<std::string>());
            comp.push_back(std::move(m));
        }
        components.push_back(std::move(comp));
    }
    Domain domain = domain_from_json(doc.at("domain"));
    std::optional<ScalingSpec> scaling;
    if (!doc.at("scaling").is_null()) scaling = scaling_from_json(doc.at("scaling"));

    // The constructor re-checks the structural invariants (no constant or
    // self-variable monomials), rejecting documents that violate them.
    return PolyVectorField(n, degree, mode, eps, std::move(components), std::move(domain),
                           std::move(scaling));
}

std::string serialize(const VarModel& model, const nlohmann::json& provenance) {
    nlohmann::json doc;
    doc["kind"] = "var";
    doc["p"] = model.p;
    doc["dimension"] = static_cast<int>(model.dimension());
    doc["has_intercept"] = model.has_intercept;
    doc["intercept"] = vector_to_json(model.intercept);
    nlohmann::json lags = nlohmann::json::array();
    for (const auto& a : model.lag_matrices) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(format_double(a(r, c)));
            rows.push_back(row);
        }
        lags.push_back(rows);
    }
    doc["lag_matrices"] = lags;
    doc["fitted_on"] = static_cast<long>(model.fitted_on);
    doc["provenance"] = provenance;
    return doc.dump(2) + "\n";
}

VarModel deserialize_var(const std::string& document) {
    const nlohmann::json doc = parse_document(document);
    if (doc.value("kind", "") != "var") throw std::invalid_argument("document is not a var model");
    VarModel model;
    model.p = doc.at("p").get<int>();
    const int n = doc.at("dimension").get<int>();
    model.has_intercept = doc.at("has_intercept").get<bool>();
    model.intercept = vector_from_json(doc.at("intercept"));
    if (model.intercept.size() != n) throw std::invalid_argument("intercept has wrong dimension");
    for (const auto& rows : doc.at("lag_matrices")) {
        Eigen::MatrixXd a(n, n);
        if (static_cast<int>(rows.size()) != n)
            throw std::invalid_argument("lag matrix has wrong row count");
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                a(r, c) = parse_double(rows[static_cast<size_t>(r)][static_cast<size_t>(c)]
                                           .get<std::string>());
        model.lag_matrices.push_back(std::move(a));
    }
    if (static_cast<int>(model.lag_matrices.size()) != model.p)
        throw std::invalid_argument("lag matrix count does not match p");
    model.fitted_on = doc.at("fitted_on").get<long>();
    return model;
}

}  // namespace trendflow
