#include "factrank/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "factrank/util.hpp"
#include "json.hpp"

namespace factrank {

namespace {

struct Scale {
  std::size_t people, companies, universities, cities, awards, industries, professions, titles;
  std::size_t marriages, employments, honors, friendships, siblings, educations, mentorships,
      advisorships;
};

Scale scale_for(const std::string& size) {
  if (size == "small")
    return Scale{140, 30, 12, 18, 10, 6, 8, 8, 45, 90, 35, 150, 80, 120, 50, 40};
  if (size == "tiny")
    return Scale{40, 8, 4, 6, 4, 3, 4, 4, 12, 24, 8, 30, 16, 26, 10, 8};
  throw DataError("unknown synthetic world size '" + size + "' (expected small|tiny)");
}

struct Builder {
  std::mt19937_64 rng;
  SynthWorld world;
  std::set<std::pair<std::string, std::string>> used_pairs;
  std::set<std::string> triple_keys;
  std::map<std::string, std::vector<std::vector<std::string>>> docs;  // source -> sentences
  int date_counter = 0;

  explicit Builder(std::uint64_t seed) : rng(rng_stream(seed, "synth")) {}

  std::string name(const std::string& prefix, std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return prefix + "_" + buf;
  }

  void entity(const std::string& id, EntityKind kind, std::vector<std::string> types) {
    world.entities.push_back(EntityDecl{id, kind, std::move(types)});
  }

  std::string fresh_date() {
    std::string id = "date_" + std::to_string(1900 + date_counter);
    date_counter += 1;
    entity(id, EntityKind::Date, {});
    return id;
  }

  bool pair_free(const std::string& a, const std::string& b) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    return !used_pairs.count(key);
  }

  void claim_pair(const std::string& a, const std::string& b) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    used_pairs.insert(key);
  }

  void triple(const std::string& s, const std::string& p, const std::string& o) {
    std::string key = s + "\t" + p + "\t" + o;
    check(triple_keys.insert(key).second, "synth: duplicate triple " + key);
    world.triples.push_back(TripleDecl{s, p, o});
  }

  // A single-predicate edge whose endpoint pair must stay uniquely connected.
  void edge(const std::string& s, const std::string& p, const std::string& o) {
    check(pair_free(s, o), "synth: pair already connected: " + s + " / " + o);
    claim_pair(s, o);
    triple(s, p, o);
  }

  std::string pick(const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(uniform_below(rng, pool.size()))];
  }

  std::string pick_excluding(const std::vector<std::string>& pool,
                             const std::set<std::string>& avoid) {
    for (int tries = 0; tries < 64; ++tries) {
      std::string c = pick(pool);
      if (!avoid.count(c)) return c;
    }
    throw InternalError("synth: pool exhausted");
  }

  bool chance(double p) { return uniform_unit(rng) < p; }

  void sentence(const std::string& source, std::vector<std::string> mentions) {
    docs[source].push_back(std::move(mentions));
  }

  void plant(const std::string& query, const std::string& fact, const std::string& e1,
             const std::string& e2, int grade) {
    world.plants.push_back(SynthPlant{query, fact, e1, e2, grade});
  }

  static std::string ser1(const std::string& p, const std::string& s, const std::string& t) {
    return p + "\t" + s + "\t" + t;
  }
  static std::string ser2(const std::string& p0, const std::string& p1, const std::string& s,
                          const std::string& cvt, const std::string& t) {
    return p0 + "|" + p1 + "\t" + s + "\t" + cvt + "\t" + t;
  }
};

}  // namespace

SynthWorld generate_synthetic_world(const SynthConfig& cfg) {
  Scale sc = scale_for(cfg.size);
  Builder b(cfg.seed);

  // --- entity inventory ---
  std::vector<std::string> people, companies, universities, cities, awards, industries,
      professions, titles;
  const std::vector<std::string> role_types{"founder", "executive", "engineer",
                                            "artist",  "scientist", "investor"};
  for (std::size_t i = 0; i < sc.cities; ++i) {
    cities.push_back(b.name("city", i));
    b.entity(cities.back(), EntityKind::Regular, {"city", "location"});
  }
  for (std::size_t i = 0; i < sc.industries; ++i) {
    industries.push_back(b.name("industry", i));
    b.entity(industries.back(), EntityKind::ClassOrType, {"classification"});
  }
  for (std::size_t i = 0; i < sc.professions; ++i) {
    professions.push_back(b.name("profession", i));
    b.entity(professions.back(), EntityKind::ClassOrType, {"classification"});
  }
  for (std::size_t i = 0; i < sc.titles; ++i) {
    titles.push_back(b.name("title", i));
    b.entity(titles.back(), EntityKind::ClassOrType, {"classification"});
  }
  for (std::size_t i = 0; i < sc.awards; ++i) {
    awards.push_back(b.name("award", i));
    b.entity(awards.back(), EntityKind::Regular, {"award"});
  }
  for (std::size_t i = 0; i < sc.universities; ++i) {
    universities.push_back(b.name("univ", i));
    b.entity(universities.back(), EntityKind::Regular, {"university", "organization"});
  }
  for (std::size_t i = 0; i < sc.companies; ++i) {
    companies.push_back(b.name("company", i));
    b.entity(companies.back(), EntityKind::Regular, {"company", "organization"});
  }
  for (std::size_t i = 0; i < sc.people; ++i) {
    people.push_back(b.name("person", i));
    std::vector<std::string> types{"person"};
    if (b.chance(0.6)) types.push_back(role_types[i % role_types.size()]);
    b.entity(people.back(), EntityKind::Regular, std::move(types));
  }

  // --- static geography and organization facts ---
  std::map<std::string, std::string> hq_of, founded_date_of, located_city_of;
  for (const auto& c : companies) {
    hq_of[c] = b.pick(cities);
    b.edge(c, "headquarteredIn", hq_of[c]);
    founded_date_of[c] = b.fresh_date();
    b.edge(c, "foundedIn", founded_date_of[c]);
    b.edge(c, "industryOf", b.pick(industries));
  }
  for (const auto& u : universities) {
    located_city_of[u] = b.pick(cities);
    b.edge(u, "locatedIn", located_city_of[u]);
  }

  // --- per-person base facts ---
  std::map<std::string, std::string> born_city_of, birth_date_of, profession_of;
  for (const auto& p : people) {
    born_city_of[p] = b.pick(cities);
    b.edge(p, "bornIn", born_city_of[p]);
    if (b.chance(0.6)) {
      std::string lives = b.pick_excluding(cities, {born_city_of[p]});
      b.edge(p, "livesIn", lives);
    }
    if (b.chance(0.5)) {
      birth_date_of[p] = b.fresh_date();
      b.edge(p, "bornOn", birth_date_of[p]);
    }
    if (b.chance(0.6)) {
      profession_of[p] = b.pick(professions);
      b.edge(p, "professionIs", profession_of[p]);
    }
  }

  // --- marriages (disjoint couples) with children ---
  struct Marriage {
    std::string a, b, cvt, date, place;
    std::vector<std::string> children;
  };
  std::vector<Marriage> marriages;
  {
    std::vector<std::string> pool = people;
    shuffle_vec(pool, b.rng);
    std::size_t next = 0;
    std::set<std::string> used_children;
    for (std::size_t i = 0; i < sc.marriages && next + 1 < pool.size(); ++i) {
      Marriage m;
      m.a = pool[next++];
      m.b = pool[next++];
      m.cvt = b.name("marriage", i);
      b.entity(m.cvt, EntityKind::Cvt, {});
      b.claim_pair(m.a, m.b);
      b.triple(m.a, "marriage", m.cvt);
      b.triple(m.cvt, "spouse", m.b);
      m.date = b.fresh_date();
      b.triple(m.cvt, "marriageDate", m.date);
      if (b.chance(0.66)) {
        std::set<std::string> avoid{born_city_of[m.a], born_city_of[m.b]};
        m.place = b.pick_excluding(cities, avoid);
        b.triple(m.cvt, "marriagePlace", m.place);
      }
      if (b.chance(0.6)) {
        std::size_t n_children = 1 + uniform_below(b.rng, 3);
        for (std::size_t k = 0; k < n_children; ++k) {
          std::string ch = b.pick(people);
          if (used_children.count(ch) || ch == m.a || ch == m.b) continue;
          if (!b.pair_free(m.a, ch) || !b.pair_free(m.b, ch)) continue;
          used_children.insert(ch);
          b.edge(m.a, "parentOf", ch);
          b.edge(m.b, "parentOf", ch);
          m.children.push_back(ch);
        }
      }
      marriages.push_back(std::move(m));
    }
  }

  // --- company roles: founders, ceo, board, investors (disjoint per company) ---
  struct CompanyRoles {
    std::string company, ceo;
    std::vector<std::string> founders, board, investors;
  };
  std::vector<CompanyRoles> roles;
  for (const auto& c : companies) {
    CompanyRoles r;
    r.company = c;
    std::set<std::string> taken;
    auto grab = [&]() {
      for (int tries = 0; tries < 64; ++tries) {
        std::string p = b.pick(people);
        if (!taken.count(p) && b.pair_free(p, c)) {
          taken.insert(p);
          return p;
        }
      }
      return std::string();
    };
    std::size_t n_founders = 1 + uniform_below(b.rng, 2);
    for (std::size_t i = 0; i < n_founders; ++i) {
      std::string p = grab();
      if (p.empty()) continue;
      b.edge(p, "founderOf", c);
      r.founders.push_back(p);
    }
    if (std::string p = grab(); !p.empty()) {
      b.edge(p, "ceoOf", c);
      r.ceo = p;
    }
    std::size_t n_board = uniform_below(b.rng, 3);
    for (std::size_t i = 0; i < n_board; ++i) {
      std::string p = grab();
      if (p.empty()) continue;
      b.edge(p, "boardMemberOf", c);
      r.board.push_back(p);
    }
    std::size_t n_inv = uniform_below(b.rng, 3);
    for (std::size_t i = 0; i < n_inv; ++i) {
      std::string p = grab();
      if (p.empty()) continue;
      b.edge(p, "investorIn", c);
      r.investors.push_back(p);
    }
    roles.push_back(std::move(r));
  }

  // --- employments (one per person) ---
  struct Employment {
    std::string person, company, cvt, title, start;
  };
  std::vector<Employment> employments;
  {
    std::vector<std::string> pool = people;
    shuffle_vec(pool, b.rng);
    std::size_t made = 0;
    for (const auto& p : pool) {
      if (made >= sc.employments) break;
      std::string c = b.pick(companies);
      if (!b.pair_free(p, c)) continue;
      Employment em;
      em.person = p;
      em.company = c;
      em.cvt = b.name("employment", made);
      b.entity(em.cvt, EntityKind::Cvt, {});
      b.claim_pair(p, c);
      b.triple(p, "employment", em.cvt);
      b.triple(em.cvt, "employer", c);
      if (b.chance(0.7)) {
        em.title = b.pick(titles);
        b.triple(em.cvt, "jobTitle", em.title);
      }
      if (b.chance(0.5)) {
        em.start = b.fresh_date();
        b.triple(em.cvt, "employmentStart", em.start);
      }
      employments.push_back(std::move(em));
      made += 1;
    }
  }

  // --- award honors ---
  for (std::size_t i = 0; i < sc.honors; ++i) {
    std::string p = b.pick(people);
    std::string w = b.pick(awards);
    if (!b.pair_free(p, w)) continue;
    std::string cvt = b.name("honor", i);
    b.entity(cvt, EntityKind::Cvt, {});
    b.claim_pair(p, w);
    b.triple(p, "awardReceived", cvt);
    b.triple(cvt, "awardName", w);
    b.triple(cvt, "awardYear", b.fresh_date());
  }

  // --- social edges ---
  for (std::size_t i = 0; i < sc.friendships; ++i) {
    std::string x = b.pick(people), y = b.pick(people);
    if (x == y || !b.pair_free(x, y)) continue;
    b.edge(x, "friendOf", y);
  }
  for (std::size_t i = 0; i < sc.siblings; ++i) {
    std::string x = b.pick(people), y = b.pick(people);
    if (x == y || !b.pair_free(x, y)) continue;
    b.edge(x, "siblingOf", y);
  }
  for (std::size_t i = 0; i < sc.mentorships; ++i) {
    std::string x = b.pick(people), y = b.pick(people);
    if (x == y || !b.pair_free(x, y)) continue;
    b.edge(x, "mentorOf", y);
  }
  for (std::size_t i = 0; i < sc.advisorships; ++i) {
    std::string p = b.pick(people);
    std::string c = b.pick(companies);
    if (!b.pair_free(p, c)) continue;
    b.edge(p, "advisorTo", c);
  }

  // --- educations ---
  struct Education {
    std::string person, university;
  };
  std::vector<Education> educations;
  std::map<std::string, std::vector<std::string>> students_of;
  {
    std::vector<std::string> pool = people;
    shuffle_vec(pool, b.rng);
    std::size_t made = 0;
    for (const auto& p : pool) {
      if (made >= sc.educations) break;
      std::string u = b.pick(universities);
      if (!b.pair_free(p, u)) continue;
      b.edge(p, "educatedAt", u);
      educations.push_back(Education{p, u});
      students_of[u].push_back(p);
      made += 1;
    }
  }

  // -------------------------------------------------------------------------
  // Plants and corpus. Every designated query fact gets one sentence in the
  // source entity's document mentioning the target plus the entities whose
  // pairwise connections pin the planted-relevant facts. ~15% of sources stay
  // undocumented so the eligibility filter is exercised.
  // -------------------------------------------------------------------------
  b.world.query_relationships = {"founderOf",         "ceoOf",   "marriage|spouse",
                                 "educatedAt",        "parentOf", "employment|employer"};

  auto documented = [&]() { return b.chance(0.85); };

  for (const auto& r : roles) {
    const std::string& c = r.company;
    for (const auto& p : r.founders) {
      std::string q = Builder::ser1("founderOf", p, c);
      std::vector<std::string> mentions{c};
      for (const auto& cofounder : r.founders) {
        if (cofounder == p) continue;
        b.plant(q, Builder::ser1("founderOf", cofounder, c), cofounder, c, 2);
        mentions.push_back(cofounder);
      }
      b.plant(q, Builder::ser1("foundedIn", c, founded_date_of[c]), c, founded_date_of[c], 2);
      mentions.push_back(founded_date_of[c]);
      b.plant(q, Builder::ser1("headquarteredIn", c, hq_of[c]), c, hq_of[c], 1);
      mentions.push_back(hq_of[c]);
      if (!r.ceo.empty()) {
        b.plant(q, Builder::ser1("ceoOf", r.ceo, c), r.ceo, c, 1);
        mentions.push_back(r.ceo);
      }
      if (documented()) b.sentence(p, mentions);
    }
    if (!r.ceo.empty()) {
      std::string q = Builder::ser1("ceoOf", r.ceo, c);
      std::vector<std::string> mentions{c};
      for (const auto& founder : r.founders) {
        b.plant(q, Builder::ser1("founderOf", founder, c), founder, c, 2);
        mentions.push_back(founder);
      }
      b.plant(q, Builder::ser1("foundedIn", c, founded_date_of[c]), c, founded_date_of[c], 1);
      mentions.push_back(founded_date_of[c]);
      b.plant(q, Builder::ser1("headquarteredIn", c, hq_of[c]), c, hq_of[c], 1);
      mentions.push_back(hq_of[c]);
      if (documented()) b.sentence(r.ceo, mentions);
    }
  }

  for (const auto& m : marriages) {
    std::string q = Builder::ser2("marriage", "spouse", m.a, m.cvt, m.b);
    std::vector<std::string> mentions{m.b};
    b.plant(q, Builder::ser2("marriage", "marriageDate", m.a, m.cvt, m.date), m.a, m.date, 2);
    mentions.push_back(m.date);
    if (!m.place.empty()) {
      b.plant(q, Builder::ser2("marriage", "marriagePlace", m.a, m.cvt, m.place), m.a, m.place, 1);
      mentions.push_back(m.place);
    }
    for (const auto& ch : m.children) {
      b.plant(q, Builder::ser1("parentOf", m.a, ch), m.a, ch, 2);
      b.plant(q, Builder::ser1("parentOf", m.b, ch), m.b, ch, 2);
      mentions.push_back(ch);
    }
    b.plant(q, Builder::ser1("bornIn", m.b, born_city_of[m.b]), m.b, born_city_of[m.b], 1);
    mentions.push_back(born_city_of[m.b]);
    if (documented()) b.sentence(m.a, mentions);

    // parentOf queries ride on the same families.
    for (const auto& ch : m.children) {
      std::string pq = Builder::ser1("parentOf", m.a, ch);
      std::vector<std::string> pm{ch};
      b.plant(pq, Builder::ser2("marriage", "spouse", m.a, m.cvt, m.b), m.a, m.b, 2);
      pm.push_back(m.b);
      for (const auto& sib : m.children) {
        if (sib == ch) continue;
        b.plant(pq, Builder::ser1("parentOf", m.a, sib), m.a, sib, 1);
        pm.push_back(sib);
      }
      if (birth_date_of.count(ch)) {
        b.plant(pq, Builder::ser1("bornOn", ch, birth_date_of[ch]), ch, birth_date_of[ch], 2);
        pm.push_back(birth_date_of[ch]);
      }
      b.plant(pq, Builder::ser1("bornIn", ch, born_city_of[ch]), ch, born_city_of[ch], 1);
      pm.push_back(born_city_of[ch]);
      if (documented()) b.sentence(m.a, pm);
    }
  }

  for (const auto& ed : educations) {
    std::string q = Builder::ser1("educatedAt", ed.person, ed.university);
    std::vector<std::string> mentions{ed.university, located_city_of[ed.university]};
    b.plant(q, Builder::ser1("locatedIn", ed.university, located_city_of[ed.university]),
            ed.university, located_city_of[ed.university], 2);
    if (profession_of.count(ed.person)) {
      b.plant(q, Builder::ser1("professionIs", ed.person, profession_of[ed.person]), ed.person,
              profession_of[ed.person], 1);
      mentions.push_back(profession_of[ed.person]);
    }
    const auto& classmates = students_of[ed.university];
    for (const auto& mate : classmates) {
      if (mate == ed.person) continue;
      b.plant(q, Builder::ser1("educatedAt", mate, ed.university), mate, ed.university, 1);
      mentions.push_back(mate);
      break;  // one classmate is enough context
    }
    if (documented()) b.sentence(ed.person, mentions);
  }

  for (const auto& em : employments) {
    std::string q = Builder::ser2("employment", "employer", em.person, em.cvt, em.company);
    std::vector<std::string> mentions{em.company};
    if (!em.title.empty()) {
      b.plant(q, Builder::ser2("employment", "jobTitle", em.person, em.cvt, em.title), em.person,
              em.title, 2);
      mentions.push_back(em.title);
    }
    if (!em.start.empty()) {
      b.plant(q, Builder::ser2("employment", "employmentStart", em.person, em.cvt, em.start),
              em.person, em.start, 1);
      mentions.push_back(em.start);
    }
    b.plant(q, Builder::ser1("headquarteredIn", em.company, hq_of[em.company]), em.company,
            hq_of[em.company], 1);
    mentions.push_back(hq_of[em.company]);
    if (documented()) b.sentence(em.person, mentions);
  }

  // Noise sentences: repeat a sentence's leading mention (the query target)
  // next to random entities, so a few non-planted facts pick up spurious
  // labels, as in real distant supervision.
  {
    std::vector<std::pair<std::string, std::string>> noisy;  // (source, leading mention)
    for (const auto& [src, sents] : b.docs) {
      if (sents.empty() || sents.front().empty()) continue;
      if (!b.chance(0.3)) continue;
      noisy.emplace_back(src, sents.front().front());
    }
    for (const auto& [src, lead] : noisy)
      b.sentence(src, {lead, b.pick(people), b.pick(cities), b.pick(people)});
  }

  for (auto& [src, sentences] : b.docs)
    b.world.documents.push_back(SynthDocument{src, std::move(sentences)});
  return std::move(b.world);
}

void write_synthetic_world(const SynthWorld& world, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [](const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw DataError("cannot write file: " + path);
    return out;
  };

  {
    auto out = open(dir + "/entities.tsv");
    for (const auto& e : world.entities) {
      const char* kind = e.kind == EntityKind::Cvt        ? "cvt"
                         : e.kind == EntityKind::Date     ? "date"
                         : e.kind == EntityKind::ClassOrType ? "class"
                                                          : "regular";
      out << e.id << '\t' << kind << '\t' << join(e.types, ',') << '\n';
    }
  }
  {
    auto out = open(dir + "/triples.tsv");
    for (const auto& t : world.triples)
      out << t.subject << '\t' << t.predicate << '\t' << t.object << '\n';
  }
  {
    auto out = open(dir + "/corpus.jsonl");
    for (const auto& doc : world.documents) {
      nlohmann::json j;
      j["source_entity"] = doc.source_entity;
      j["sentences"] = doc.sentences;
      out << j.dump() << '\n';
    }
  }
  {
    // Judgments: best grade per (query, fact) pair.
    std::map<std::pair<std::string, std::string>, int> grades;
    for (const auto& p : world.plants) {
      auto key = std::make_pair(p.query, p.fact);
      auto it = grades.find(key);
      if (it == grades.end() || it->second < p.grade) grades[key] = p.grade;
    }
    auto out = open(dir + "/judgments.tsv");
    for (const auto& [key, grade] : grades)
      out << key.first << '\t' << key.second << '\t' << grade << '\n';
  }
  {
    auto out = open(dir + "/plants.tsv");
    for (const auto& p : world.plants)
      out << p.query << '\t' << p.fact << '\t' << p.e1 << '\t' << p.e2 << '\t' << p.grade << '\n';
  }
  {
    auto out = open(dir + "/query_relationships.txt");
    for (const auto& r : world.query_relationships) out << r << '\n';
  }
}

}  // namespace factrank
