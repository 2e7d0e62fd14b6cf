#pragma once

#include <Eigen/Core>
#include <fstream>
#include <string>
#include <vector>

#include "fmpinn/config.hpp"
#include "fmpinn/trainer.hpp"

namespace fmpinn {

/// Streams evaluation rows into run.csv as training progresses. All values
/// are printed round-trip exact, so equal runs give byte-identical files.
class RunCsvWriter {
public:
    explicit RunCsvWriter(const std::string& path);
    void write_row(const EvalRow& row);

private:
    std::ofstream out_;
};

struct ArtifactEntry {
    std::string kind;
    std::string path;
};

void write_summary(const std::string& path, const RunRecord& record, const KvMap& config_echo,
                   const std::vector<ArtifactEntry>& artifacts, const std::string& status = "ok");

/// Pointwise error field: coordinates, prediction, reference, |difference|.
void write_error_field_csv(const std::string& path, const Eigen::MatrixXd& points,
                           const Eigen::VectorXd& prediction, const Eigen::VectorXd& reference);

struct SweepRow {
    std::string value;
    double final_rel = 0.0;
    double wall_seconds = 0.0;
    std::string status;
};
void write_sweep_csv(const std::string& path, const std::string& axis,
                     const std::vector<SweepRow>& rows);

}  // namespace fmpinn
