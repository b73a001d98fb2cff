#include "sbmor/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbmor/errors.hpp"
#include "sbmor/matrix_market.hpp"

namespace sbmor {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("file not found: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& err) {
        throw IoError(path + ": " + err.what());
    }
    return j;
}

std::string resolve(const std::string& manifest_path, const std::string& rel) {
    const fs::path p(rel);
    if (p.is_absolute()) return rel;
    return (fs::path(manifest_path).parent_path() / p).string();
}

Eigen::MatrixXd load_named_matrix(const ordered_json& j, const char* key,
                                  const std::string& manifest_path) {
    if (!j.contains(key))
        throw IoError(manifest_path + ": missing matrix entry '" + key + "'");
    return read_matrix_market(resolve(manifest_path, j.at(key).get<std::string>()));
}

std::vector<Eigen::MatrixXd> load_matrix_list(const ordered_json& j,
                                              const char* key,
                                              const std::string& manifest_path) {
    std::vector<Eigen::MatrixXd> list;
    if (!j.contains(key)) return list;
    for (const auto& entry : j.at(key))
        list.push_back(
            read_matrix_market(resolve(manifest_path, entry.get<std::string>())));
    return list;
}

} // namespace

BilinearStochasticSystem load_system_manifest(const std::string& manifest_path) {
    const ordered_json j = load_json(manifest_path);
    BilinearStochasticSystem sys;
    sys.A = load_named_matrix(j, "A", manifest_path);
    sys.B = load_named_matrix(j, "B", manifest_path);
    sys.C = load_named_matrix(j, "C", manifest_path);
    sys.K = load_named_matrix(j, "K", manifest_path);
    sys.N = load_matrix_list(j, "N", manifest_path);
    sys.H = load_matrix_list(j, "H", manifest_path);

    if (j.contains("n") && j.at("n").get<Eigen::Index>() != sys.state_dim())
        throw IoError(manifest_path + ": declared n disagrees with A");
    if (j.contains("m") && j.at("m").get<Eigen::Index>() != sys.input_dim())
        throw IoError(manifest_path + ": declared m disagrees with B");
    if (j.contains("p") && j.at("p").get<Eigen::Index>() != sys.output_dim())
        throw IoError(manifest_path + ": declared p disagrees with C");
    if (j.contains("v") && j.at("v").get<Eigen::Index>() != sys.noise_dim())
        throw IoError(manifest_path + ": declared v disagrees with K");
    return sys;
}

std::string save_system_manifest(const BilinearStochasticSystem& sys,
                                 const std::string& dir,
                                 const std::string& name) {
    fs::create_directories(dir);
    const auto mtx = [&](const std::string& stem, const Eigen::MatrixXd& M) {
        const std::string file = name + "_" + stem + ".mtx";
        write_matrix_market(M, (fs::path(dir) / file).string());
        return file;
    };

    ordered_json j;
    j["n"] = sys.state_dim();
    j["m"] = sys.input_dim();
    j["p"] = sys.output_dim();
    j["v"] = sys.noise_dim();
    j["A"] = mtx("A", sys.A);
    j["B"] = mtx("B", sys.B);
    j["C"] = mtx("C", sys.C);
    j["K"] = mtx("K", sys.K);
    ordered_json n_list = ordered_json::array();
    for (std::size_t k = 0; k < sys.N.size(); ++k)
        n_list.push_back(mtx("N" + std::to_string(k + 1), sys.N[k]));
    j["N"] = n_list;
    ordered_json h_list = ordered_json::array();
    for (std::size_t i = 0; i < sys.H.size(); ++i)
        h_list.push_back(mtx("H" + std::to_string(i + 1), sys.H[i]));
    j["H"] = h_list;

    const std::string manifest_path = (fs::path(dir) / (name + ".json")).string();
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write " + manifest_path);
    out << j.dump(2) << "\n";
    return manifest_path;
}

std::string save_rom_manifest(const ReducedModel& rom, const std::string& dir,
                              const std::string& name) {
    fs::create_directories(dir);
    const auto mtx = [&](const std::string& stem, const Eigen::MatrixXd& M) {
        const std::string file = name + "_" + stem + ".mtx";
        write_matrix_market(M, (fs::path(dir) / file).string());
        return file;
    };

    ordered_json j;
    j["order"] = rom.r;
    j["n"] = rom.r;
    j["m"] = rom.input_dim();
    j["p"] = rom.output_dim();
    j["v"] = rom.noise_dim();
    j["A"] = mtx("A", rom.A);
    j["B"] = mtx("B", rom.B);
    j["C"] = mtx("C", rom.C);
    j["D"] = mtx("D", rom.D);
    j["K"] = mtx("K", rom.K);
    const auto list = [&](const char* stem,
                          const std::vector<Eigen::MatrixXd>& ms) {
        ordered_json arr = ordered_json::array();
        for (std::size_t i = 0; i < ms.size(); ++i)
            arr.push_back(mtx(stem + std::to_string(i + 1), ms[i]));
        return arr;
    };
    j["N"] = list("N", rom.N);
    j["H"] = list("H", rom.H);
    j["E"] = list("E", rom.E);
    j["F"] = list("F", rom.F);

    const std::string manifest_path = (fs::path(dir) / (name + ".json")).string();
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write " + manifest_path);
    out << j.dump(2) << "\n";
    return manifest_path;
}

ReducedModel load_rom_manifest(const std::string& manifest_path) {
    const ordered_json j = load_json(manifest_path);
    if (!j.contains("order"))
        throw IoError(manifest_path + ": missing 'order' field");
    ReducedModel rom;
    rom.r = j.at("order").get<Eigen::Index>();
    rom.A = load_named_matrix(j, "A", manifest_path);
    rom.B = load_named_matrix(j, "B", manifest_path);
    rom.C = load_named_matrix(j, "C", manifest_path);
    rom.D = load_named_matrix(j, "D", manifest_path);
    rom.K = load_named_matrix(j, "K", manifest_path);
    rom.N = load_matrix_list(j, "N", manifest_path);
    rom.H = load_matrix_list(j, "H", manifest_path);
    rom.E = load_matrix_list(j, "E", manifest_path);
    rom.F = load_matrix_list(j, "F", manifest_path);
    return rom;
}

std::optional<ControlSignal>
load_manifest_control(const std::string& manifest_path, double horizon) {
    const ordered_json j = load_json(manifest_path);
    if (!j.contains("control")) return std::nullopt;
    const auto& c = j.at("control");
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "zero") {
        const auto m = c.contains("m") ? c.at("m").get<Eigen::Index>()
                                       : j.at("m").get<Eigen::Index>();
        return ControlSignal::zero(m, horizon);
    }
    if (kind == "constant" || kind == "sinusoid") {
        const auto amp = c.at("amplitude").get<std::vector<double>>();
        Eigen::VectorXd a =
            Eigen::Map<const Eigen::VectorXd>(amp.data(),
                                              static_cast<Eigen::Index>(amp.size()));
        if (kind == "constant") return ControlSignal::constant(a, horizon);
        return ControlSignal::sinusoid(a, c.at("frequency").get<double>(),
                                       horizon);
    }
    if (kind == "table" || kind == "csv")
        return load_control_csv(resolve(manifest_path, c.at("csv").get<std::string>()),
                                horizon);
    throw IoError(manifest_path + ": unknown control kind '" + kind + "'");
}

ControlSignal load_control_csv(const std::string& csv_path, double horizon) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("file not found: " + csv_path);
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> row;
        bool header = false;
        while (std::getline(cells, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                if (line_no == 1) { header = true; break; }
                throw IoError(csv_path + ":" + std::to_string(line_no) +
                              ": not a number: '" + cell + "'");
            }
        }
        if (header || row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size() + 1)
            throw IoError(csv_path + ":" + std::to_string(line_no) +
                          ": inconsistent column count");
        times.push_back(row.front());
        rows.emplace_back(row.begin() + 1, row.end());
    }
    if (rows.empty()) throw IoError(csv_path + ": no data rows");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                rows[i][k];
    return ControlSignal::table(std::move(times), std::move(values), horizon);
}

ControlSignal parse_control_spec(const std::string& spec, Eigen::Index m,
                                 double horizon) {
    const auto parse_amplitudes = [&](const std::string& csv) {
        std::vector<double> amps;
        std::istringstream cells(csv);
        std::string cell;
        while (std::getline(cells, cell, ','))
            amps.push_back(std::stod(cell));
        if (amps.size() == 1 && m > 1) amps.assign(static_cast<std::size_t>(m), amps[0]);
        if (static_cast<Eigen::Index>(amps.size()) != m)
            throw IoError("control spec: expected " + std::to_string(m) +
                          " amplitudes, got " + std::to_string(amps.size()));
        return Eigen::VectorXd(
            Eigen::Map<const Eigen::VectorXd>(amps.data(),
                                              static_cast<Eigen::Index>(amps.size())));
    };

    if (spec == "zero") return ControlSignal::zero(m, horizon);
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    try {
        if (kind == "constant")
            return ControlSignal::constant(parse_amplitudes(rest), horizon);
        if (kind == "sinusoid") {
            const auto semi = rest.find(';');
            if (semi == std::string::npos)
                throw IoError("sinusoid spec needs 'freq;amplitudes'");
            const double freq = std::stod(rest.substr(0, semi));
            return ControlSignal::sinusoid(parse_amplitudes(rest.substr(semi + 1)),
                                           freq, horizon);
        }
        if (kind == "table") return load_control_csv(rest, horizon);
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& err) {
        throw IoError("bad control spec '" + spec + "': " + err.what());
    }
    throw IoError("unknown control spec '" + spec +
                  "' (use zero | constant:... | sinusoid:f;... | table:file.csv)");
}

} // namespace sbmor
