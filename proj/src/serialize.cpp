#include "qevo/serialize.hpp"

#include "qevo/error.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qevo {

namespace {

constexpr std::array<char, 8> kGenomeMagic{'Q', 'E', 'V', 'O', 'G', 'N', 'M', '\0'};
constexpr const char *kGenomeTextTag = "qevo-genome";

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
	for (int b = 0; b < 4; ++b) {
		out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
	}
}

void put_u64(std::vector<std::uint8_t> &out, std::uint64_t v) {
	for (int b = 0; b < 8; ++b) {
		out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
	}
}

class ByteReader {
public:
	explicit ByteReader(const std::vector<std::uint8_t> &bytes) : bytes_(bytes) {
	}

	std::uint64_t u64() {
		return read(8);
	}
	std::uint32_t u32() {
		return static_cast<std::uint32_t>(read(4));
	}
	double f64() {
		return std::bit_cast<double>(u64());
	}
	void skip(std::size_t n) {
		need(n);
		pos_ += n;
	}
	bool exhausted() const {
		return pos_ == bytes_.size();
	}

private:
	void need(std::size_t n) const {
		if (bytes_.size() - pos_ < n) {
			throw Error(ErrorCode::MalformedGenome, "genome data truncated");
		}
	}
	std::uint64_t read(std::size_t n) {
		need(n);
		std::uint64_t v = 0;
		for (std::size_t b = 0; b < n; ++b) {
			v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
		}
		pos_ += n;
		return v;
	}

	const std::vector<std::uint8_t> &bytes_;
	std::size_t pos_ = 0;
};

std::string hex_double(double v) {
	std::array<char, 64> buf{};
	std::snprintf(buf.data(), buf.size(), "%a", v);
	return buf.data();
}

double parse_hex_double(const std::string &s) {
	char *end = nullptr;
	const double v = std::strtod(s.c_str(), &end);
	if (s.empty() || end != s.c_str() + s.size()) {
		throw Error(ErrorCode::MalformedGenome, "bad phase literal '" + s + "'");
	}
	return v;
}

std::string read_file(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
	}
	std::ostringstream buf;
	buf << in.rdbuf();
	return buf.str();
}

void write_file(const std::filesystem::path &path, const std::string &data) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
	}
	out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

nlohmann::json genome_to_json(const NetworkGenome &g) {
	const auto &a = g.architecture();
	return {{"input_width", a.input_width},
	        {"hidden_widths", a.hidden_widths},
	        {"output_width", a.output_width},
	        {"phases", std::vector<double>(g.phases().begin(), g.phases().end())}};
}

NetworkGenome genome_from_json(const nlohmann::json &j) {
	Architecture a;
	a.input_width = j.at("input_width").get<std::size_t>();
	a.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
	a.output_width = j.at("output_width").get<std::size_t>();
	return NetworkGenome(a, j.at("phases").get<std::vector<double>>());
}

} // namespace

std::vector<std::uint8_t> encode_genome_binary(const NetworkGenome &genome) {
	const auto &a = genome.architecture();
	std::vector<std::uint8_t> out(kGenomeMagic.begin(), kGenomeMagic.end());
	put_u32(out, kGenomeFormatVersion);
	put_u32(out, 0);
	put_u64(out, a.input_width);
	put_u64(out, a.depth());
	for (auto w : a.hidden_widths) {
		put_u64(out, w);
	}
	put_u64(out, a.output_width);
	put_u64(out, genome.size());
	for (double p : genome.phases()) {
		put_u64(out, std::bit_cast<std::uint64_t>(p));
	}
	return out;
}

NetworkGenome decode_genome_binary(const std::vector<std::uint8_t> &bytes) {
	if (bytes.size() < kGenomeMagic.size() ||
	    std::memcmp(bytes.data(), kGenomeMagic.data(), kGenomeMagic.size()) != 0) {
		throw Error(ErrorCode::MalformedGenome, "missing genome magic");
	}
	ByteReader in(bytes);
	in.skip(kGenomeMagic.size());
	const auto version = in.u32();
	if (version != kGenomeFormatVersion) {
		throw Error(ErrorCode::MalformedGenome, "unsupported genome version " + std::to_string(version));
	}
	in.u32();
	Architecture a;
	a.input_width = in.u64();
	const auto depth = in.u64();
	if (depth > bytes.size()) {
		throw Error(ErrorCode::MalformedGenome, "implausible depth");
	}
	a.hidden_widths.resize(depth);
	for (auto &w : a.hidden_widths) {
		w = in.u64();
	}
	a.output_width = in.u64();
	const auto count = in.u64();
	if (count > bytes.size() / 8) {
		throw Error(ErrorCode::MalformedGenome, "phase count exceeds data");
	}
	std::vector<double> phases(count);
	for (auto &p : phases) {
		p = in.f64();
	}
	if (!in.exhausted()) {
		throw Error(ErrorCode::MalformedGenome, "trailing bytes after genome");
	}
	try {
		return NetworkGenome(std::move(a), std::move(phases));
	} catch (const Error &e) {
		throw Error(ErrorCode::MalformedGenome, e.what());
	}
}

std::string encode_genome_text(const NetworkGenome &genome) {
	const auto &a = genome.architecture();
	std::ostringstream out;
	out << kGenomeTextTag << ' ' << kGenomeFormatVersion << '\n';
	out << "input " << a.input_width << '\n';
	out << "hidden";
	for (auto w : a.hidden_widths) {
		out << ' ' << w;
	}
	out << '\n';
	out << "output " << a.output_width << '\n';
	out << "phases " << genome.size() << '\n';
	for (double p : genome.phases()) {
		out << hex_double(p) << '\n';
	}
	return out.str();
}

NetworkGenome decode_genome_text(const std::string &text) {
	std::istringstream in(text);
	auto expect = [&](const char *key) {
		std::string word;
		if (!(in >> word) || word != key) {
			throw Error(ErrorCode::MalformedGenome, std::string("expected '") + key + "'");
		}
	};
	expect(kGenomeTextTag);
	std::uint32_t version = 0;
	if (!(in >> version) || version != kGenomeFormatVersion) {
		throw Error(ErrorCode::MalformedGenome, "unsupported genome text version");
	}
	Architecture a;
	expect("input");
	in >> a.input_width;
	expect("hidden");
	a.hidden_widths.clear();
	std::string line;
	std::getline(in, line);
	std::istringstream widths(line);
	for (std::size_t w; widths >> w;) {
		a.hidden_widths.push_back(w);
	}
	expect("output");
	in >> a.output_width;
	expect("phases");
	std::size_t count = 0;
	if (!(in >> count) || count > text.size()) {
		throw Error(ErrorCode::MalformedGenome, "bad phase count");
	}
	std::vector<double> phases;
	phases.reserve(count);
	for (std::size_t k = 0; k < count; ++k) {
		std::string tok;
		if (!(in >> tok)) {
			throw Error(ErrorCode::MalformedGenome, "genome text truncated");
		}
		phases.push_back(parse_hex_double(tok));
	}
	try {
		return NetworkGenome(std::move(a), std::move(phases));
	} catch (const Error &e) {
		throw Error(ErrorCode::MalformedGenome, e.what());
	}
}

void save_genome(const NetworkGenome &genome, const std::filesystem::path &path) {
	if (path.extension() == ".txt") {
		write_file(path, encode_genome_text(genome));
		return;
	}
	const auto bytes = encode_genome_binary(genome);
	write_file(path, std::string(bytes.begin(), bytes.end()));
}

NetworkGenome load_genome(const std::filesystem::path &path) {
	const auto data = read_file(path);
	if (data.size() >= kGenomeMagic.size() && std::memcmp(data.data(), kGenomeMagic.data(), kGenomeMagic.size()) == 0) {
		return decode_genome_binary(std::vector<std::uint8_t>(data.begin(), data.end()));
	}
	return decode_genome_text(data);
}

std::string encode_checkpoint(const Checkpoint &cp) {
	using nlohmann::json;
	const auto &c = cp.config;
	json j;
	j["schema_version"] = kCheckpointFormatVersion;
	j["config"] = {{"population_size", c.population_size},
	               {"generations", c.generations},
	               {"window_size", c.window_size},
	               {"min_hidden_width", c.min_hidden_width},
	               {"max_hidden_width", c.max_hidden_width},
	               {"min_depth", c.min_depth},
	               {"max_depth", c.max_depth},
	               {"rate_mean", c.rate_mean},
	               {"rate_stddev", c.rate_stddev},
	               {"initial_probabilities", c.initial_probabilities},
	               {"seed", c.seed},
	               {"mode", to_string(c.mode)},
	               {"stagnation_patience", c.stagnation_patience}};
	json candidates = json::array();
	for (const auto &g : cp.population.candidates) {
		candidates.push_back(genome_to_json(g));
	}
	j["population"] = {{"generation", cp.population.generation},
	                   {"best_index", cp.population.best_index},
	                   {"fitness", cp.population.fitness},
	                   {"candidates", std::move(candidates)}};
	j["strategy"] = {{"probabilities", cp.state.probabilities},
	                 {"successes", cp.state.successes},
	                 {"failures", cp.state.failures}};
	json gens = json::array();
	for (const auto &g : cp.report.generations) {
		gens.push_back({{"generation", g.generation},
		                {"best_fitness", g.best_fitness},
		                {"probabilities", g.probabilities},
		                {"successes", g.successes},
		                {"failures", g.failures},
		                {"best_hidden_widths", g.best_hidden_widths}});
	}
	j["report"] = {{"generations", std::move(gens)},
	               {"success_totals", cp.report.success_totals},
	               {"failure_totals", cp.report.failure_totals},
	               {"final_probabilities", cp.report.final_probabilities},
	               {"degenerate_args", cp.report.degenerate_args}};
	return j.dump();
}

Checkpoint decode_checkpoint(const std::string &text) {
	try {
		const auto j = nlohmann::json::parse(text);
		if (j.at("schema_version").get<std::uint32_t>() != kCheckpointFormatVersion) {
			throw Error(ErrorCode::MalformedCheckpoint, "unsupported checkpoint version");
		}
		Checkpoint cp;
		const auto &c = j.at("config");
		auto &cfg = cp.config;
		cfg.population_size = c.at("population_size").get<std::size_t>();
		cfg.generations = c.at("generations").get<std::size_t>();
		cfg.window_size = c.at("window_size").get<std::size_t>();
		cfg.min_hidden_width = c.at("min_hidden_width").get<std::size_t>();
		cfg.max_hidden_width = c.at("max_hidden_width").get<std::size_t>();
		cfg.min_depth = c.at("min_depth").get<std::size_t>();
		cfg.max_depth = c.at("max_depth").get<std::size_t>();
		cfg.rate_mean = c.at("rate_mean").get<double>();
		cfg.rate_stddev = c.at("rate_stddev").get<double>();
		cfg.initial_probabilities = c.at("initial_probabilities").get<std::array<double, kStrategyCount>>();
		cfg.seed = c.at("seed").get<std::uint64_t>();
		cfg.mode = parse_ablation_mode(c.at("mode").get<std::string>());
		cfg.stagnation_patience = c.at("stagnation_patience").get<std::size_t>();

		const auto &p = j.at("population");
		cp.population.generation = p.at("generation").get<std::size_t>();
		cp.population.best_index = p.at("best_index").get<std::size_t>();
		cp.population.fitness = p.at("fitness").get<std::vector<double>>();
		for (const auto &g : p.at("candidates")) {
			cp.population.candidates.push_back(genome_from_json(g));
		}
		if (cp.population.best_index >= cp.population.candidates.size()) {
			throw Error(ErrorCode::MalformedCheckpoint, "best index out of range");
		}

		const auto &s = j.at("strategy");
		cp.state.probabilities = s.at("probabilities").get<std::array<double, kStrategyCount>>();
		cp.state.successes = s.at("successes").get<std::array<std::uint64_t, kStrategyCount>>();
		cp.state.failures = s.at("failures").get<std::array<std::uint64_t, kStrategyCount>>();

		const auto &r = j.at("report");
		for (const auto &g : r.at("generations")) {
			GenerationRecord rec;
			rec.generation = g.at("generation").get<std::size_t>();
			rec.best_fitness = g.at("best_fitness").get<double>();
			rec.probabilities = g.at("probabilities").get<std::array<double, kStrategyCount>>();
			rec.successes = g.at("successes").get<std::array<std::uint64_t, kStrategyCount>>();
			rec.failures = g.at("failures").get<std::array<std::uint64_t, kStrategyCount>>();
			rec.best_hidden_widths = g.at("best_hidden_widths").get<std::vector<std::size_t>>();
			cp.report.generations.push_back(std::move(rec));
		}
		cp.report.success_totals = r.at("success_totals").get<std::array<std::uint64_t, kStrategyCount>>();
		cp.report.failure_totals = r.at("failure_totals").get<std::array<std::uint64_t, kStrategyCount>>();
		cp.report.final_probabilities = r.at("final_probabilities").get<std::array<double, kStrategyCount>>();
		cp.report.degenerate_args = r.at("degenerate_args").get<std::uint64_t>();
		return cp;
	} catch (const nlohmann::json::exception &e) {
		throw Error(ErrorCode::MalformedCheckpoint, std::string("checkpoint parse failed: ") + e.what());
	} catch (const Error &e) {
		if (e.code() == ErrorCode::MalformedCheckpoint) {
			throw;
		}
		throw Error(ErrorCode::MalformedCheckpoint, e.what());
	}
}

void save_checkpoint(const Checkpoint &checkpoint, const std::filesystem::path &path) {
	write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
	return decode_checkpoint(read_file(path));
}

} // namespace qevo
