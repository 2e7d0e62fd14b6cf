#include "fmpinn/report.hpp"

#include <cmath>

#include <json.hpp>

#include "fmpinn/format.hpp"

namespace fmpinn {

RunCsvWriter::RunCsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open for writing: " + path);
    out_ << "epoch,lr,gamma,loss_pde,loss_flux,loss_boundary,loss_total,rel\n";
}

void RunCsvWriter::write_row(const EvalRow& r) {
    out_ << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.gamma) << ','
         << format_double(r.loss_pde) << ',' << format_double(r.loss_flux) << ','
         << format_double(r.loss_boundary) << ',' << format_double(r.loss_total) << ','
         << format_double(r.rel) << '\n';
    out_.flush();
}

void write_summary(const std::string& path, const RunRecord& rec, const KvMap& config_echo,
                   const std::vector<ArtifactEntry>& artifacts, const std::string& status) {
    nlohmann::ordered_json j;
    j["status"] = status;
    j["problem"] = rec.problem;
    j["method"] = rec.method;
    j["seed"] = rec.seed;
    j["config_hash"] = rec.config_hash;
    j["epochs_run"] = rec.epochs_run;
    if (std::isfinite(rec.final_rel))
        j["final_rel"] = rec.final_rel;
    else
        j["final_rel"] = nullptr;
    j["wall_seconds"] = rec.wall_seconds;
    j["coefficient_min"] = rec.lambda_min;
    j["coefficient_max"] = rec.lambda_max;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config_echo) cfg[k] = v;
    j["config"] = std::move(cfg);
    nlohmann::ordered_json arts = nlohmann::ordered_json::object();
    for (const auto& a : artifacts) arts[a.kind] = a.path;
    j["artifacts"] = std::move(arts);

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void write_error_field_csv(const std::string& path, const Eigen::MatrixXd& points,
                           const Eigen::VectorXd& prediction, const Eigen::VectorXd& reference) {
    if (points.cols() != prediction.size() || points.cols() != reference.size())
        throw ConfigError("write_error_field_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    for (int k = 0; k < points.rows(); ++k) out << "x" << (k + 1) << ",";
    out << "u_pred,u_ref,abs_err\n";
    for (long long i = 0; i < points.cols(); ++i) {
        for (int k = 0; k < points.rows(); ++k) out << format_double(points(k, i)) << ',';
        const double diff = std::abs(prediction[i] - reference[i]);
        out << format_double(prediction[i]) << ',' << format_double(reference[i]) << ','
            << format_double(diff) << '\n';
    }
}

void write_sweep_csv(const std::string& path, const std::string& axis,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << axis << ",final_rel,wall_seconds,status\n";
    for (const auto& r : rows)
        out << r.value << ',' << format_double(r.final_rel) << ',' << format_double(r.wall_seconds)
            << ',' << r.status << '\n';
}

}  // namespace fmpinn
