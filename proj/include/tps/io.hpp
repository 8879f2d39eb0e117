#ifndef TPS_IO_HPP
#define TPS_IO_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tps {

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    int column(const std::string& name) const;  // -1 when absent
};

// Strict numeric CSV: one header line, comma separation, every cell a finite
// number. Throws SchemaError with row/column diagnostics.
CsvTable read_csv(const std::string& path);

// Writes with round-trip-exact "%.17g" formatting so repeated runs are
// byte-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

// Covariate-block manifest sidecar: {"x_block": [names...], "z_block": [...]}.
struct BlockManifest {
    std::vector<std::string> x_block;
    std::vector<std::string> z_block;  // empty for vertical files
};

BlockManifest read_manifest(const std::string& path);

}  // namespace tps

#endif
