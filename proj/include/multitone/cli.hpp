#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "multitone/common.hpp"
#include "multitone/decompose.hpp"
#include "multitone/oracle_bench.hpp"
#include "multitone/signal.hpp"
#include "multitone/spectrum.hpp"
#include "multitone/tone_fit.hpp"

namespace multitone {

/// Unreadable, empty, or malformed sample input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InputDocument {
  Signal samples;
  std::optional<double> sample_rate_hz;  ///< display only, from the header line
  std::string source_path;
};

/// Parses one sample per line. Lines starting with '#' are comments; a
/// comment containing "sample_rate=<Hz>" sets the display rate. Blank lines
/// and surrounding whitespace are ignored; anything else must be a finite
/// decimal number.
inline InputDocument parse_samples(std::istream& in, const std::string& source) {
  InputDocument doc;
  doc.source_path = source;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) {
      continue;
    }
    const std::string location = source + ":" + std::to_string(line_number);
    if (line[begin] == '#') {
      const std::size_t key = line.find("sample_rate=", begin);
      if (key != std::string::npos) {
        const std::string value = line.substr(key + std::string("sample_rate=").size());
        char* end = nullptr;
        const double rate = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || !std::isfinite(rate) || rate <= 0.0) {
          throw InputError(location + ": invalid sample_rate header");
        }
        doc.sample_rate_hz = rate;
      }
      continue;
    }
    const char* text = line.c_str() + begin;
    char* end = nullptr;
    const double value = std::strtod(text, &end);
    if (end == text) {
      throw InputError(location + ": not a number: " + line);
    }
    while (*end == ' ' || *end == '\t') {
      ++end;
    }
    if (*end != '\0') {
      throw InputError(location + ": trailing characters after the sample value");
    }
    if (!std::isfinite(value)) {
      throw InputError(location + ": sample is not finite");
    }
    doc.samples.push_back(value);
  }
  if (doc.samples.size() < 2) {
    throw InputError(source + ": need at least 2 samples");
  }
  return doc;
}

inline InputDocument load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw InputError(path + ": cannot open for reading");
  }
  return parse_samples(in, path);
}

/// Built-in synthesis scene for --synth.
struct SynthPreset {
  std::vector<ToneParams> tones;
  std::size_t n_samples = 0;
  double noise_sigma = 0.0;  ///< 0 means the seed is unused
};

inline SynthPreset synth_preset(const std::string& name) {
  const auto demo3_tones = [] {
    const double n = 4096.0;
    return std::vector<ToneParams>{{kTwoPi * 80.21 / n, 1.0, 0.6},
                                   {kTwoPi * 160.68 / n, 0.7, -1.1},
                                   {kTwoPi * 411.33 / n, 0.4, 2.2}};
  };
  if (name == "demo3") {
    return {demo3_tones(), 4096, 0.0};
  }
  if (name == "demo3-noisy") {
    const std::vector<ToneParams> tones = demo3_tones();
    return {tones, 4096, noise_sigma_for_snr(tones, 20.0)};
  }
  if (name == "single") {
    return {{{kTwoPi * 100.37 / 1024.0, 1.0, 0.6}}, 1024, 0.0};
  }
  throw CLI::ValidationError("--synth", "unknown preset '" + name +
                                            "' (available: demo3, demo3-noisy, single)");
}

/// Echo of the effective settings for the output document.
struct RunSettings {
  std::optional<std::size_t> tone_count;  ///< empty = blind
  double epsilon = 1e-4;
  std::size_t max_tones = 32;
  double residual_threshold = 1e-3;
  std::optional<std::uint64_t> seed;  ///< present for synthesized input with noise
};

inline nlohmann::ordered_json make_output_document(const InputDocument& input,
                                                   const RunSettings& settings,
                                                   const DecompositionResult& result) {
  nlohmann::ordered_json doc;
  doc["source"] = input.source_path;
  doc["n_samples"] = input.samples.size();
  if (input.sample_rate_hz) {
    doc["sample_rate_hz"] = *input.sample_rate_hz;
  }
  nlohmann::ordered_json config;
  config["mode"] = settings.tone_count ? "known" : "blind";
  if (settings.tone_count) {
    config["tone_count"] = *settings.tone_count;
  }
  config["epsilon"] = settings.epsilon;
  config["max_tones"] = settings.max_tones;
  config["residual_threshold"] = settings.residual_threshold;
  if (settings.seed) {
    config["seed"] = *settings.seed;
  }
  doc["config"] = config;
  doc["original_energy"] = signal_energy(input.samples);
  doc["residual_energy"] = signal_energy(result.residual);
  doc["stop_reason"] = to_string(result.stop_reason);
  doc["tones"] = nlohmann::ordered_json::array();
  for (const ToneEstimate& tone : result.tones) {
    nlohmann::ordered_json entry;
    entry["frequency_rad_per_sample"] = tone.frequency;
    if (input.sample_rate_hz) {
      entry["frequency_hz"] = tone.frequency / kTwoPi * *input.sample_rate_hz;
    }
    entry["amplitude"] = tone.amplitude;
    entry["phase_rad"] = tone.phase;
    doc["tones"].push_back(entry);
  }
  doc["iterations"] = nlohmann::ordered_json::array();
  for (const IterationRecord& record : result.iterations) {
    doc["iterations"].push_back({{"selected_bin", record.selected_bin},
                                 {"refined_frequency_rad_per_sample", record.refined_frequency},
                                 {"residual_energy", record.residual_energy},
                                 {"dtft_evaluations", record.dtft_evaluations},
                                 {"repairs", record.repairs},
                                 {"truncated", record.refine_truncated},
                                 {"interval_width_rad_per_sample", record.refine_interval_width},
                                 {"near_previous_bin", record.near_previous_bin}});
  }
  return doc;
}

/// Plot-ready dump: (frequency, magnitude) lines of the input's DFT, then of
/// the residual DFT after each fitted tone prefix; blocks are separated by
/// blank lines. The prefix refits reproduce the spectra the decomposition
/// itself searched, since every step is deterministic.
inline void dump_spectra(std::ostream& out, const Signal& x, const DecompositionResult& result,
                         double duplicate_separation) {
  char line[80];
  const auto write_block = [&](const Signal& signal, const std::string& title) {
    out << "# " << title << "\n";
    const HalfSpectrum spectrum = dft(signal);
    for (std::size_t k = 0; k < spectrum.bins.size(); ++k) {
      const double w = spectrum.bin_width() * static_cast<double>(k);
      std::snprintf(line, sizeof(line), "%.17g %.17g\n", w, std::abs(spectrum.bins[k]));
      out << line;
    }
    out << "\n";
  };
  write_block(x, "input signal");
  std::vector<double> freqs;
  for (std::size_t i = 0; i < result.tones.size(); ++i) {
    freqs.push_back(result.tones[i].frequency);
    const JointFit fit = joint_ls_fit(x, freqs, duplicate_separation);
    const Signal residual = subtract_model(x, fit.coefficients, freqs);
    write_block(residual, "residual after " + std::to_string(i + 1) + " fitted tone(s)");
  }
}

/// Runs the command-line front end. Exit statuses: 0 success, 2 argument
/// error, 3 input error, 4 decomposition error.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Blind multi-tone decomposition: estimates sinusoid frequencies, amplitudes, and "
               "phases from a real sample sequence"};
  app.get_formatter()->column_width(36);

  std::string in_path;
  std::string preset_name;
  std::size_t tone_count = 0;
  bool blind = false;
  double epsilon = 1e-4;
  std::size_t max_tones = 32;
  double residual_threshold = 1e-3;
  std::string dump_path;
  std::string out_path;
  std::uint64_t seed = 1;

  CLI::Option* in_opt =
      app.add_option("--in", in_path, "input sample file, one sample per line ('#' comments)");
  CLI::Option* synth_opt =
      app.add_option("--synth", preset_name, "built-in scene: demo3, demo3-noisy, single");
  in_opt->excludes(synth_opt);
  synth_opt->excludes(in_opt);

  CLI::Option* tones_opt =
      app.add_option("--tones", tone_count, "known tone count (known-count mode)")
          ->check(CLI::PositiveNumber);
  CLI::Option* blind_opt = app.add_flag("--blind", blind, "blind mode: stop on residual energy");
  tones_opt->excludes(blind_opt);
  blind_opt->excludes(tones_opt);

  app.add_option("--epsilon", epsilon, "refinement resolution as a fraction of a bin, in (0, 1]")
      ->capture_default_str();
  app.add_option("--max-tones", max_tones, "blind-mode tone cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--residual-threshold", residual_threshold,
                 "blind stopping fraction of the input energy, in (0, 1)")
      ->capture_default_str();
  app.add_option("--dump-spectrum", dump_path,
                 "write (frequency, magnitude) blocks of the input DFT and per-iteration "
                 "residual DFTs");
  app.add_option("--out", out_path, "write the result document here instead of stdout");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "noise seed for --synth presets")->capture_default_str();
  seed_opt->needs(synth_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 2;
  }

  const auto fail = [](int status, const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return status;
  };

  if (in_path.empty() && preset_name.empty()) {
    return fail(2, "exactly one of --in or --synth is required");
  }
  if (tone_count == 0 && !blind) {
    return fail(2, "exactly one of --tones or --blind is required");
  }
  if (!(std::isfinite(epsilon) && epsilon > 0.0 && epsilon <= 1.0)) {
    return fail(2, "--epsilon must lie in (0, 1]");
  }
  if (!(std::isfinite(residual_threshold) && residual_threshold > 0.0 &&
        residual_threshold < 1.0)) {
    return fail(2, "--residual-threshold must lie in (0, 1)");
  }
  if (tone_count > max_tones) {
    return fail(2, "--tones exceeds --max-tones");
  }

  try {
    RunSettings settings;
    if (tone_count > 0) {
      settings.tone_count = tone_count;
    }
    settings.epsilon = epsilon;
    settings.max_tones = max_tones;
    settings.residual_threshold = residual_threshold;

    InputDocument input;
    if (!preset_name.empty()) {
      SynthPreset preset;
      try {
        preset = synth_preset(preset_name);
      } catch (const CLI::ValidationError& error) {
        return fail(2, error.what());
      }
      input.samples = synthesize(preset.tones, preset.n_samples, {preset.noise_sigma, seed});
      input.source_path = "synth:" + preset_name;
      if (preset.noise_sigma > 0.0) {
        settings.seed = seed;
      }
    } else {
      input = load_samples(in_path);
    }
    if (input.samples.size() < 4) {
      throw InputError(input.source_path + ": need at least 4 samples to decompose");
    }
    if (settings.tone_count && 2 * *settings.tone_count > input.samples.size()) {
      return fail(2, "--tones asks for more basis columns than there are samples");
    }

    DecompositionConfig config;
    config.tone_count = settings.tone_count;
    config.refine.epsilon = epsilon;
    config.max_tones = max_tones;
    config.residual_energy_fraction = residual_threshold;
    const DecompositionResult result = decompose(input.samples, config);

    if (!dump_path.empty()) {
      std::ofstream dump(dump_path);
      if (!dump.is_open()) {
        throw InputError(dump_path + ": cannot open for writing");
      }
      const double duplicate_separation =
          kTwoPi * epsilon / static_cast<double>(input.samples.size());
      dump_spectra(dump, input.samples, result, duplicate_separation);
    }

    const nlohmann::ordered_json document = make_output_document(input, settings, result);
    const std::string serialized = document.dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << serialized;
    } else {
      std::ofstream out(out_path);
      if (!out.is_open()) {
        throw InputError(out_path + ": cannot open for writing");
      }
      out << serialized;
    }
    return 0;
  } catch (const InputError& error) {
    return fail(3, error.what());
  } catch (const DecompositionError& error) {
    return fail(4, error.what());
  } catch (const FitError& error) {
    return fail(4, error.what());
  } catch (const std::invalid_argument& error) {
    return fail(2, error.what());
  } catch (const std::exception& error) {
    return fail(4, error.what());
  }
}

/// Convenience entry point for tests: argv without the program name.
inline int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("multitone");
  for (const std::string& arg : args) {
    argv.push_back(arg.c_str());
  }
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace multitone
