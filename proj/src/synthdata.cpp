#include "reacfuse/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "reacfuse/parallel.hpp"
#include "reacfuse/rng.hpp"

namespace reacfuse::synth {

namespace {

// ---- calendar helpers (civil <-> days, Hinnant's algorithm) ----

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::string iso_date(std::int64_t day) {
  int y, m, d;
  civil_from_days(day, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

const std::int64_t kFirstDay = days_from_civil(2015, 1, 1);
const std::int64_t kLastDay = days_from_civil(2022, 12, 31);

// ---- text template pools ----

const std::vector<std::string> kTechnologies = {"Single", "Library", "HTE", "Flow", "Parallel"};
const std::vector<double> kTechnologyWeights = {0.55, 0.20, 0.10, 0.05, 0.10};

const std::vector<std::string> kSetups = {
    "A, B and C in D were stirred at %d degC for %d h.",
    "A and B were dissolved in D and treated with C at %d degC.",
    "A, B, D, F in G were stirred under nitrogen at %d degC.",
    "B was added dropwise to A in D at %d degC and the mixture was stirred for %d h.",
};

const std::vector<std::string> kWorkup = {
    "The mixture was cooled to room temperature and quenched with water.",
    "The layers were separated and the aqueous phase was extracted twice.",
    "The combined organic layers were dried and concentrated under reduced pressure.",
    "The residue was taken up in EtOAc and washed with brine.",
    "The suspension was filtered through a pad of celite.",
    "Volatiles were removed on the rotary evaporator.",
    "The crude material was loaded onto a silica column.",
    "Fractions containing the desired mass were pooled.",
    "The solution was stirred overnight and monitored by LCMS.",
    "The reaction was held at the same temperature for an additional hour.",
    "The mixture was allowed to warm slowly while stirring continued.",
    "An additional portion of C was charged after two hours.",
};

const std::vector<std::string> kSuccessEndings = {
    "Purification by column chromatography afforded P1, %d mg (%s).",
    "P1 was isolated as a white solid, %d mg (%s).",
    "Work-up and recrystallization gave P1 in %s yield.",
    "The title compound P1 was obtained, %d mg (%s).",
};

const std::vector<std::string> kFailureEndings = {
    "No conversion was observed.",
    "The reaction failed; only starting material was recovered.",
    "LCMS showed no product formation.",
    "No desired mass was found and the batch was discarded.",
};

const std::vector<std::string> kBuriedFailureCues = {
    "The combined fractions contained P1, %d mg (%s).",
    "Isolation over three stages returned %d mg (%s) of P1.",
};

const std::vector<std::string> kNeutralTail = {
    "The residue was dried under high vacuum overnight.",
    "Samples were submitted for full characterization.",
    "The remaining fractions were archived.",
    "The material was stored under argon.",
    "The column was flushed with additional eluent.",
};

const std::vector<std::string> kSuccessComments = {"ok", "clean conversion", "done",
                                                   "checked by LCMS"};
const std::vector<std::string> kFailureComments = {"failed", "no product", "sm only",
                                                   "messy, discarded"};
const std::vector<std::string> kNeutralComments = {"long workup", "see fractions log"};

const std::vector<std::string> kNearEmptyPos = {"done", "ok", "product isolated", "see notebook"};
const std::vector<std::string> kNearEmptyNeg = {"failed", "no conversion", "no product",
                                                "see notebook"};

std::string pct_string(double y) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%.1f%%", y);
  return buf;
}

std::string fill(const std::string& tmpl, Rng& rng, double yield_pct) {
  // %d slots get small integers, %s slots the yield string
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '%' && i + 1 < tmpl.size()) {
      char k = tmpl[i + 1];
      if (k == 'd') {
        out += std::to_string(rng.range(5, 320));
        ++i;
        continue;
      }
      if (k == 's') {
        out += pct_string(yield_pct);
        ++i;
        continue;
      }
    }
    out += tmpl[i];
  }
  return out;
}

std::string fill_setup(const std::string& tmpl, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '%' && i + 1 < tmpl.size() && tmpl[i + 1] == 'd') {
      out += std::to_string(i < tmpl.size() / 2 ? rng.range(20, 120) : rng.range(1, 48));
      ++i;
      continue;
    }
    out += tmpl[i];
  }
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

int weighted_pick(const std::vector<double>& w, Rng& rng) {
  double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

}  // namespace

// ---- planted rule -----------------------------------------------------------

std::string PlantedRule::dump(double noise_rate) const {
  const auto& lib = MotifLibrary::instance();
  std::string out;
  out += "# planted success rule\n";
  out += "# success cell: (substrate_class + 2*partner_class + catalyst_index) % 7 < 4\n";
  out += "# success cells fire with probability " + std::to_string(1.0 - noise_rate) +
         ", others with " + std::to_string(noise_rate) + "\n";
  out += "# any poison additive forces the failure branch\n";
  for (int s = 0; s < n_substrate_classes; ++s)
    for (int p = 0; p < n_partner_classes; ++p)
      for (int c = 0; c < n_catalysts; ++c) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "sub=%d partner=%d catalyst=%s -> %s\n", s, p,
                      lib.catalysts()[static_cast<std::size_t>(c)].c_str(),
                      cell_success(s, p, c) ? "success" : "failure");
        out += buf;
      }
  out += "poisons:";
  for (const auto& p : lib.poisons()) out += " " + p;
  out += "\n";
  return out;
}

// ---- motif library ----------------------------------------------------------

MotifLibrary::MotifLibrary() {
  struct Tpl {
    const char* smiles;
    int cls;
  };
  // last atom of every substrate is the leaving group
  const Tpl subs[] = {
      {"C1CCCCC1Cl", 0},        {"CC1CCCC1Cl", 0},      {"C1CC(C)CCC1Cl", 0},
      {"C1CCCC1Cl", 0},         {"C1CCCCC1Br", 1},      {"CC1CCCCC1Br", 1},
      {"C1CC(C)CC1Br", 1},      {"CCI", 2},             {"CCCI", 2},
      {"CC(C)CI", 2},           {"CCCCI", 2},           {"CC(=O)Cl", 3},
      {"CCC(=O)Cl", 3},         {"C1CCCC1C(=O)Cl", 3},  {"CC(C)Br", 4},
      {"CCC(C)Br", 4},          {"CC(C)(C)CBr", 4},     {"CCCC(C)Br", 4},
      {"C1CCCCC1C(=O)Cl", 5},   {"C1CCC(CC1)C(=O)Cl", 5},
  };
  // first atom of every partner is the attachment point
  const Tpl partners[] = {
      {"NCC", 0},        {"NCCC", 0},    {"NC1CCCC1", 0}, {"N(C)C", 1},
      {"N(C)CC", 1},     {"OCC", 2},     {"OC(C)C", 2},   {"SCC", 3},
      {"SCCC", 3},       {"C(B(O)O)C", 4}, {"C(B(O)O)CC", 4},
  };
  substrates_by_class_.resize(6);
  for (const auto& t : subs) {
    substrates_by_class_[static_cast<std::size_t>(t.cls)].push_back(
        static_cast<int>(substrate_smiles_.size()));
    substrate_smiles_.push_back(t.smiles);
    substrate_class_.push_back(t.cls);
  }
  partners_by_class_.resize(5);
  for (const auto& t : partners) {
    partners_by_class_[static_cast<std::size_t>(t.cls)].push_back(
        static_cast<int>(partner_smiles_.size()));
    partner_smiles_.push_back(t.smiles);
    partner_class_.push_back(t.cls);
  }
  catalysts_ = {"Pd(PPh3)4", "Pd(OAc)2", "PdCl2", "CuI", "NiCl2"};
  solvents_ = {"THF", "DMF", "MeCN", "toluene"};
  bases_ = {"K2CO3", "Et3N"};
  poisons_ = {"thiourea", "PPh3S"};
}

const MotifLibrary& MotifLibrary::instance() {
  static MotifLibrary lib;
  return lib;
}

int MotifLibrary::substrate_count() const { return static_cast<int>(substrate_smiles_.size()); }
int MotifLibrary::partner_count() const { return static_cast<int>(partner_smiles_.size()); }
int MotifLibrary::substrate_class(int v) const { return substrate_class_[static_cast<std::size_t>(v)]; }
int MotifLibrary::partner_class(int v) const { return partner_class_[static_cast<std::size_t>(v)]; }
const std::vector<int>& MotifLibrary::substrates_of_class(int cls) const {
  return substrates_by_class_[static_cast<std::size_t>(cls)];
}
const std::vector<int>& MotifLibrary::partners_of_class(int cls) const {
  return partners_by_class_[static_cast<std::size_t>(cls)];
}

chem::Reaction MotifLibrary::build_reaction(int substrate_variant, int partner_variant) const {
  chem::Molecule sub = chem::parse_molecule(substrate_smiles_[static_cast<std::size_t>(substrate_variant)]);
  chem::Molecule par = chem::parse_molecule(partner_smiles_[static_cast<std::size_t>(partner_variant)]);

  // drop the leaving atom (always last) and bond its neighbor to the
  // partner's first atom
  const int leaving = sub.atom_count() - 1;
  int attach = -1;
  chem::Molecule product;
  product.atoms.assign(sub.atoms.begin(), sub.atoms.end() - 1);
  for (const auto& b : sub.bonds) {
    if (b.a == leaving || b.b == leaving) {
      attach = b.a == leaving ? b.b : b.a;
      continue;
    }
    product.bonds.push_back(b);
  }
  const int offset = product.atom_count();
  for (const auto& a : par.atoms) product.atoms.push_back(a);
  for (const auto& b : par.bonds) product.bonds.push_back({b.a + offset, b.b + offset, b.order});
  product.bonds.push_back({std::min(attach, offset), std::max(attach, offset), 1});
  product.finalize();

  chem::Reaction rxn;
  rxn.reactants = {std::move(sub), std::move(par)};
  rxn.product = std::move(product);
  return rxn;
}

std::vector<std::string> MotifLibrary::rsc_tokens() const {
  std::vector<std::string> all;
  for (const auto& v : {catalysts_, solvents_, bases_, poisons_})
    all.insert(all.end(), v.begin(), v.end());
  return all;
}

chem::RscVocab MotifLibrary::build_rsc_vocab() const {
  return chem::RscVocab::from_tokens(rsc_tokens());
}

chem::AtomVocab MotifLibrary::build_atom_vocab() const {
  std::map<std::pair<std::string, int>, bool> seen;
  auto visit = [&](const std::string& s) {
    for (const auto& a : chem::parse_molecule(s).atoms)
      seen[{a.element, a.formal_charge}] = true;
  };
  for (const auto& s : substrate_smiles_) visit(s);
  for (const auto& s : partner_smiles_) visit(s);
  std::vector<std::pair<std::string, int>> pairs;
  for (const auto& [k, v] : seen) pairs.push_back(k);
  return chem::AtomVocab::from_pairs(std::move(pairs));
}

std::optional<MotifLibrary::Classified> MotifLibrary::classify(const std::string& reaction_text) const {
  static const std::map<std::string, int>* sub_lookup = [] {
    auto* m = new std::map<std::string, int>;
    const auto& lib = instance();
    for (std::size_t i = 0; i < lib.substrate_smiles_.size(); ++i) {
      chem::Molecule mol = chem::parse_molecule(lib.substrate_smiles_[i]);
      (*m)[chem::write_molecule(mol)] = static_cast<int>(i);
    }
    return m;
  }();
  static const std::map<std::string, int>* par_lookup = [] {
    auto* m = new std::map<std::string, int>;
    const auto& lib = instance();
    for (std::size_t i = 0; i < lib.partner_smiles_.size(); ++i) {
      chem::Molecule mol = chem::parse_molecule(lib.partner_smiles_[i]);
      (*m)[chem::write_molecule(mol)] = static_cast<int>(i);
    }
    return m;
  }();

  chem::RscVocab vocab = build_rsc_vocab();
  chem::Reaction rxn;
  try {
    rxn = chem::parse_reaction(reaction_text, vocab);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (rxn.reactants.size() != 2) return std::nullopt;
  auto s_it = sub_lookup->find(chem::write_molecule(rxn.reactants[0]));
  auto p_it = par_lookup->find(chem::write_molecule(rxn.reactants[1]));
  if (s_it == sub_lookup->end() || p_it == par_lookup->end()) return std::nullopt;

  Classified c{};
  c.substrate_class = substrate_class_[static_cast<std::size_t>(s_it->second)];
  c.partner_class = partner_class_[static_cast<std::size_t>(p_it->second)];
  c.catalyst = -1;
  c.poisoned = false;
  for (int id : rxn.rsc_ids) {
    const std::string& tok = vocab.token(id);
    for (std::size_t i = 0; i < catalysts_.size(); ++i)
      if (tok == catalysts_[i]) c.catalyst = static_cast<int>(i);
    for (const auto& p : poisons_)
      if (tok == p) c.poisoned = true;
  }
  if (c.catalyst < 0) return std::nullopt;
  return c;
}

// ---- generation --------------------------------------------------------------

namespace {

struct RecordPlan {
  bool labeled, target_pos, pd, poisoned, near_empty;
  int sub_class, partner_class, catalyst;
  int sub_variant, partner_variant;
};

RecordPlan plan_record(const GeneratorSpec& spec, const MotifLibrary& lib, const PlantedRule& rule,
                       Rng& rng) {
  RecordPlan plan{};
  plan.near_empty = rng.bernoulli(spec.near_empty_fraction);
  plan.labeled = !rng.bernoulli(spec.unlabeled_fraction);
  double share = plan.labeled ? spec.labeled_pos_fraction : spec.unlabeled_pos_fraction;
  // compensate for rule noise so the realized share matches the requested one
  double t = (share - spec.noise_rate) / (1.0 - 2.0 * spec.noise_rate);
  plan.target_pos = rng.bernoulli(std::clamp(t, 0.0, 1.0));
  plan.pd = rng.bernoulli(spec.pd_fraction);
  plan.poisoned = !plan.target_pos && rng.bernoulli(0.20);

  const bool want_cell = plan.poisoned ? true : plan.target_pos;
  std::vector<int> pool;
  for (int c = 0; c < rule.n_catalysts; ++c)
    if (lib.catalyst_is_pd(c) == plan.pd) pool.push_back(c);

  for (int attempt = 0; attempt < 64; ++attempt) {
    int s = rng.range(0, rule.n_substrate_classes - 1);
    int p = rng.range(0, rule.n_partner_classes - 1);
    std::vector<int> candidates;
    for (int c : pool)
      if (rule.cell_success(s, p, c) == want_cell) candidates.push_back(c);
    if (candidates.empty()) continue;
    plan.sub_class = s;
    plan.partner_class = p;
    // concentrated catalyst choice keeps masked-RSC prediction learnable
    std::size_t preferred = static_cast<std::size_t>(s * 31 + p * 17) % candidates.size();
    plan.catalyst = rng.bernoulli(0.8) ? candidates[preferred]
                                       : candidates[rng.below(candidates.size())];
    plan.sub_variant = pick(lib.substrates_of_class(s), rng);
    plan.partner_variant = pick(lib.partners_of_class(p), rng);
    return plan;
  }
  // deterministic fallback scan
  for (int s = 0; s < rule.n_substrate_classes; ++s)
    for (int p = 0; p < rule.n_partner_classes; ++p)
      for (int c : pool)
        if (rule.cell_success(s, p, c) == want_cell) {
          plan.sub_class = s;
          plan.partner_class = p;
          plan.catalyst = c;
          plan.sub_variant = lib.substrates_of_class(s)[0];
          plan.partner_variant = lib.partners_of_class(p)[0];
          return plan;
        }
  throw DataError("InvalidSpec", "planted rule has no cell for the requested outcome");
}

std::string build_procedure(Rng& rng, bool cue_pos, bool verbose, double text_yield) {
  std::string proc = fill_setup(pick(kSetups, rng), rng);
  double target_len = std::exp(rng.normal() * (cue_pos ? 0.42 : 0.38) +
                               std::log(cue_pos ? 185.0 : 112.0));
  if (verbose) target_len = std::min(target_len * rng.uniform(3.5, 7.5), 2900.0);

  auto append = [&](const std::string& s) {
    proc += " ";
    proc += s;
  };

  if (cue_pos) {
    while (proc.size() + 60 < target_len) append(pick(kWorkup, rng));
    append(fill(pick(kSuccessEndings, rng), rng, text_yield));
  } else if (verbose) {
    // multistage isolation narrative: the only outcome signal is a small
    // percentage buried mid-text, followed by procedural tail sentences
    std::size_t head = static_cast<std::size_t>(target_len * 0.6);
    while (proc.size() + 60 < head) append(pick(kWorkup, rng));
    append(fill(pick(kBuriedFailureCues, rng), rng, text_yield));
    while (proc.size() + 60 < target_len) append(pick(kNeutralTail, rng));
    if (proc.size() < head + 80) append(pick(kNeutralTail, rng));
  } else {
    while (proc.size() + 60 < target_len) append(pick(kWorkup, rng));
    append(pick(kFailureEndings, rng));
  }
  return proc;
}

data::ElnRecord make_record(const GeneratorSpec& spec, const MotifLibrary& lib,
                            const PlantedRule& rule, std::uint64_t index) {
  Rng rng = Rng::derive(spec.seed, index);
  RecordPlan plan = plan_record(spec, lib, rule, rng);

  data::ElnRecord rec;
  chem::Reaction rxn = lib.build_reaction(plan.sub_variant, plan.partner_variant);
  std::vector<std::string> agents{lib.catalysts()[static_cast<std::size_t>(plan.catalyst)]};
  std::size_t solvent = rng.below(lib.solvents().size());
  bool with_solvent = rng.bernoulli(0.85);
  if (with_solvent) {
    // solvent concentrated per (sub, partner) pair, like the catalyst
    if (rng.bernoulli(0.8))
      solvent = static_cast<std::size_t>(plan.sub_class * 7 + plan.partner_class * 3) %
                lib.solvents().size();
    agents.push_back(lib.solvents()[solvent]);
  }
  if (plan.poisoned)
    agents.push_back(lib.poisons()[rng.below(lib.poisons().size())]);
  else if (rng.bernoulli(0.5))
    agents.push_back(lib.bases()[static_cast<std::size_t>(plan.sub_class) % lib.bases().size()]);

  chem::RscVocab vocab = lib.build_rsc_vocab();
  for (const auto& a : agents) rxn.rsc_ids.push_back(vocab.id_of(a));
  rec.reaction = chem::write_reaction(rxn, vocab);

  const double p_success =
      rule.success_prob(plan.sub_class, plan.partner_class, plan.catalyst, plan.poisoned,
                        spec.noise_rate);
  const bool gt = rng.bernoulli(p_success);
  rec.ground_truth = gt ? 1 : 0;
  rec.rule_id = rule.rule_id(plan.sub_class, plan.partner_class, plan.catalyst, plan.poisoned);

  double yield = gt ? rng.uniform(data::kYieldCutoffPct, 95.0) : rng.uniform(0.0, data::kYieldCutoffPct);
  yield = std::round(yield * 10.0) / 10.0;
  if (yield >= 95.0) yield = 94.9;
  if (gt && yield < data::kYieldCutoffPct) yield = data::kYieldCutoffPct;
  if (plan.labeled) {
    if (gt || rng.bernoulli(0.5))
      rec.yield_pct = yield;
    else
      rec.outcome_label = "neg";
  }

  rec.timestamp = iso_date(kFirstDay + static_cast<std::int64_t>(rng.below(
                                           static_cast<std::uint64_t>(kLastDay - kFirstDay + 1))));
  rec.technology = kTechnologies[static_cast<std::size_t>(weighted_pick(kTechnologyWeights, rng))];
  rec.product_label = "P1";
  if (lib.catalyst_is_pd(plan.catalyst)) rec.tags.push_back("Pd");

  const bool cue_pos = gt != rng.bernoulli(spec.text_noise);
  const bool verbose = rng.bernoulli(cue_pos ? 0.10 : 0.08);
  const double text_yield = cue_pos ? (rec.yield_pct && gt ? *rec.yield_pct : rng.uniform(6.0, 92.0))
                                    : rng.uniform(0.4, 4.9);

  if (plan.near_empty) {
    rec.procedure = cue_pos ? pick(kNearEmptyPos, rng) : pick(kNearEmptyNeg, rng);
    rec.comments = "";
    return rec;
  }

  rec.procedure = build_procedure(rng, cue_pos, verbose, text_yield);
  if (cue_pos) {
    rec.comments = rng.bernoulli(0.70) ? pick(kSuccessComments, rng) : "";
  } else if (verbose) {
    rec.comments = rng.bernoulli(0.3) ? pick(kNeutralComments, rng) : "";
  } else {
    rec.comments = rng.bernoulli(0.80) ? pick(kFailureComments, rng) : "";
  }
  return rec;
}

}  // namespace

std::vector<data::ElnRecord> generate(const GeneratorSpec& spec) {
  if (spec.n_records <= 0) throw ConfigError("InvalidSpec", "n_records must be positive");
  for (double f : {spec.unlabeled_fraction, spec.labeled_pos_fraction, spec.unlabeled_pos_fraction,
                   spec.near_empty_fraction, spec.pd_fraction, spec.text_noise})
    if (f < 0.0 || f > 1.0) throw ConfigError("InvalidSpec", "fractions must be in [0,1]");
  if (spec.noise_rate <= 0.0 || spec.noise_rate >= 0.5)
    throw ConfigError("InvalidSpec", "noise_rate must be in (0, 0.5)");

  const MotifLibrary& lib = MotifLibrary::instance();
  PlantedRule rule;
  std::vector<data::ElnRecord> out(static_cast<std::size_t>(spec.n_records));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = make_record(spec, lib, rule, static_cast<std::uint64_t>(i));
  });
  return out;
}

std::optional<int> detect_text_cue(const data::ElnRecord& rec) {
  const std::string text = rec.procedure + " | " + rec.comments;

  // explicit percentages are the strongest cue
  double best_pct = -1.0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '%') continue;
    std::size_t j = i;
    while (j > 0 && (std::isdigit(static_cast<unsigned char>(text[j - 1])) || text[j - 1] == '.'))
      --j;
    if (j < i) best_pct = std::max(best_pct, std::atof(text.substr(j, i - j).c_str()));
  }
  if (best_pct >= 0.0) return best_pct >= data::kYieldCutoffPct ? 1 : 0;

  for (const char* kw : {"failed", "no conversion", "no product", "sm only", "discarded",
                         "no desired mass"})
    if (text.find(kw) != std::string::npos) return 0;
  for (const char* kw : {"afforded P1", "isolated", "title compound", "done", "ok",
                         "clean conversion", "checked by LCMS"})
    if (text.find(kw) != std::string::npos) return 1;
  return std::nullopt;
}

}  // namespace reacfuse::synth
