#include <algorithm>
#include <map>
#include <set>

#include "optree/persona.hpp"
#include "optree/vocab.hpp"
#include "persona_internal.hpp"
#include "persona_pools.hpp"

namespace optree::persona {

namespace detail {

std::string song_title(std::string_view artist, int k) {
    uint64_t h = splitmix(fnv(artist) + static_cast<uint64_t>(k) * 7919);
    return std::string(pools::kTitleWords1[h % pools::kTitleWords1.size()]) + " " +
           std::string(pools::kTitleWords2[(h / 97) % pools::kTitleWords2.size()]);
}

int song_seconds(std::string_view artist, std::string_view title) {
    return 150 + static_cast<int>(fnv(std::string(artist) + "/" + std::string(title)) % 181);
}

}  // namespace detail

using detail::Rng;

namespace {

Date add_years(Date d, int years) { return add_months(d, 12 * years); }

Date random_date(Rng& r, Date lo, Date hi) {
    if (hi < lo) return lo;
    return Date{lo.days + r.uniform(0, static_cast<int>(hi.days - lo.days))};
}

json date_json(Date d) { return format_date(d); }

json stage_json(const Stage& s) {
    return {{"what", s.what},
            {"organization", s.organization},
            {"city", s.city},
            {"start", date_json(s.start)},
            {"end", s.end ? json(date_json(*s.end)) : json()}};
}

// Successive stages: the last starts at `last_start`, earlier ones are spread
// evenly from `first_start`; each ends the day before the next starts.
std::vector<Date> stage_starts(Date first_start, Date last_start, size_t n) {
    std::vector<Date> out;
    if (n == 1) return {last_start};
    for (size_t i = 0; i < n; ++i)
        out.push_back(Date{first_start.days + (last_start.days - first_start.days) * static_cast<int64_t>(i) /
                                                  static_cast<int64_t>(n - 1)});
    return out;
}

}  // namespace

std::vector<std::string> Persona::people() const {
    std::vector<std::string> out{mother, father};
    if (partner) out.push_back(*partner);
    for (const auto& s : siblings) out.push_back(s);
    for (const auto& k : kids) out.push_back(k.name);
    for (const auto& f : friends) out.push_back(f);
    return out;
}

std::string Persona::user_info() const {
    std::string out = "mother: " + mother + "\nfather: " + father + "\n";
    if (partner) out += "partner: " + *partner + "\n";
    for (const auto& s : siblings) out += "sibling: " + s + "\n";
    for (const auto& k : kids) out += "kid: " + k.name + "\n";
    for (const auto& f : friends) out += "friend: " + f + "\n";
    return out;
}

Persona generate_persona(uint64_t seed) {
    Rng r(detail::mix(seed, "persona"));
    Persona p;
    p.seed = seed;

    // First names are unique within a persona so that text mentions resolve to one person.
    std::vector<std::string> firsts(pools::kFirstNames.begin(), pools::kFirstNames.end());
    r.shuffle(firsts);
    size_t next = 0;
    auto first = [&] { return firsts.at(next++); };
    auto surname = [&] { return std::string(r.pick(pools::kLastNames)); };

    const std::string last = surname();
    p.gender = r.chance(0.5) ? "female" : "male";
    p.name = first() + " " + last;
    const int by = r.uniform(1972, 1992);
    p.birth_date = make_date(by, r.uniform(1, 12), r.uniform(1, 28));
    p.birth_city = std::string(r.pick(vocab::kCities).name);
    p.mother = first() + " " + surname();
    p.father = first() + " " + last;

    const Date horizon = make_date(2023, 10, 31);
    if (r.chance(0.75)) {
        p.partner = first() + " " + surname();
        p.wedding_date = std::min(random_date(r, add_years(p.birth_date, 24), add_years(p.birth_date, 33)),
                                  make_date(2023, 6, 30));
        int n_kids = r.pick(std::array<int, 6>{0, 1, 1, 2, 2, 3});
        Date lo = std::max(add_years(*p.wedding_date, 1), add_years(p.birth_date, 20));
        std::vector<Date> births;
        for (int i = 0; i < n_kids && lo < horizon; ++i) births.push_back(random_date(r, lo, horizon));
        std::sort(births.begin(), births.end());
        for (Date b : births) {
            auto c = civil_from_days(b.days);
            if (c.day > 28) b = make_date(c.year, c.month, 28);  // keeps birthdays in every year
            p.kids.push_back({first() + " " + last, b});
        }
    }
    for (int i = 0, n = r.uniform(0, 2); i < n; ++i) p.siblings.push_back(first() + " " + last);
    for (int i = 0, n = r.uniform(4, 6); i < n; ++i) p.friends.push_back(first() + " " + surname());

    auto pet_names = r.sample(pools::kPetNames, 2);
    for (int i = 0, n = r.uniform(0, 2); i < n; ++i) {
        Pet pet{pet_names[i], std::string(r.pick(pools::kPetKinds)), {}, {}};
        pet.start = random_date(r, add_years(p.birth_date, 20), make_date(2023, 6, 30));
        if (r.chance(0.25)) {
            Date end = add_years(pet.start, r.uniform(2, 12));
            if (end < make_date(2023, 12, 31)) pet.end = end;
        }
        p.pets.push_back(pet);
    }

    // Education: one degree starting at 18.
    const auto& uni_city = r.pick(vocab::kCities);
    Date edu_start = make_date(by + 18, 9, 1);
    Date edu_end = make_date(by + 18 + r.uniform(3, 5), 7, 31);
    p.education.push_back({r.chance(0.5) ? "Bachelor" : "Master", std::string(r.pick(pools::kSchools)),
                           std::string(uni_city.name), edu_start, edu_end});

    // Career: the latest job starts inside 2022-2023 half of the time.
    size_t n_jobs = static_cast<size_t>(r.uniform(2, 3));
    Date job0 = Date{edu_end.days + r.uniform(30, 120)};
    Date last_job = r.chance(0.5) ? random_date(r, make_date(2022, 2, 1), make_date(2023, 10, 31))
                                  : random_date(r, Date{job0.days + 700}, make_date(2021, 10, 31));
    if (last_job.days <= job0.days + 365 * static_cast<int64_t>(n_jobs)) last_job = Date{job0.days + 400 * static_cast<int64_t>(n_jobs)};
    auto job_starts = stage_starts(job0, last_job, n_jobs);
    auto companies = r.sample(pools::kCompanies, n_jobs);
    for (size_t i = 0; i < n_jobs; ++i) {
        Stage s{std::string(r.pick(pools::kRoles)), companies[i], std::string(r.pick(vocab::kCities).name),
                job_starts[i], {}};
        if (i + 1 < n_jobs) s.end = Date{job_starts[i + 1].days - 1};
        p.career.push_back(s);
    }

    // Residences: childhood home, student home, then 1-2 later homes.
    size_t n_later = static_cast<size_t>(r.uniform(1, 2));
    Date move0 = Date{edu_end.days + r.uniform(10, 60)};
    Date last_move = r.chance(0.5) ? random_date(r, make_date(2022, 3, 1), make_date(2023, 9, 30))
                                   : random_date(r, Date{move0.days + 500}, make_date(2021, 9, 30));
    if (last_move.days <= move0.days + 365 * static_cast<int64_t>(n_later)) last_move = Date{move0.days + 400 * static_cast<int64_t>(n_later)};
    auto streets = r.sample(pools::kStreets, 2 + n_later);
    p.residences.push_back({streets[0], "", p.birth_city, p.birth_date, Date{edu_start.days - 1}});
    p.residences.push_back({streets[1], "", std::string(uni_city.name), edu_start, Date{move0.days - 1}});
    auto move_starts = stage_starts(move0, last_move, n_later);
    for (size_t i = 0; i < n_later; ++i) {
        Stage s{streets[2 + i], "", std::string(r.pick(vocab::kCities).name), move_starts[i], {}};
        if (i + 1 < n_later) s.end = Date{move_starts[i + 1].days - 1};
        p.residences.push_back(s);
    }

    p.music_genres = r.sample(vocab::kMusicGenres, static_cast<size_t>(r.uniform(2, 3)));
    for (const auto& g : p.music_genres) {
        std::vector<std::string> of_genre;
        for (const auto& a : pools::kArtists)
            if (a.genre == g) of_genre.emplace_back(a.name);
        for (auto& a : r.sample(of_genre, static_cast<size_t>(r.uniform(1, 2)))) p.favorite_artists.push_back(a);
    }
    for (int i = 0; i < 3; ++i) {
        const auto& a = r.pick(p.favorite_artists);
        p.favorite_songs.push_back(detail::song_title(a, r.uniform(0, 7)));
    }
    p.movie_genres = r.sample(vocab::kScreenGenres, static_cast<size_t>(r.uniform(2, 3)));
    p.tv_genres = r.sample(vocab::kScreenGenres, 2);
    {
        std::vector<std::string> liked, other;
        for (const auto& s : pools::kSeries)
            (std::count(p.tv_genres.begin(), p.tv_genres.end(), s.genre) ? liked : other).emplace_back(s.title);
        r.shuffle(liked);
        r.shuffle(other);
        liked.insert(liked.end(), other.begin(), other.end());
        liked.resize(static_cast<size_t>(r.uniform(2, 3)));
        p.favorite_series = liked;
    }
    p.shopping_categories = r.sample(vocab::kShoppingCategories, 3);
    {
        std::vector<std::string> countries;
        for (const auto& c : vocab::kCities)
            if (std::find(countries.begin(), countries.end(), c.country) == countries.end())
                countries.emplace_back(c.country);
        p.travel_countries = r.sample(countries, static_cast<size_t>(r.uniform(2, 3)));
    }
    {
        std::vector<std::string> cuisines;
        for (const auto& c : vocab::kCuisines) cuisines.emplace_back(c.name);
        p.cuisines = r.sample(cuisines, static_cast<size_t>(r.uniform(2, 3)));
    }
    p.hobbies = r.sample(pools::kHobbies, 2);
    p.workouts = r.sample(vocab::kWorkoutTypes, static_cast<size_t>(r.uniform(2, 3)));

    auto& f = p.frequencies;
    f.songs_per_day = r.real(6, 12);
    f.movies_per_week = r.real(1, 2.5);
    f.episodes_per_week = r.real(2, 5);
    f.workouts_per_week = r.real(2, 4.5);
    f.purchases_per_month = r.real(3, 6);
    f.meetings_per_month = r.real(5, 9);
    f.doctor_visits_per_year = r.real(3, 6);
    f.trips_per_year = r.real(1.5, 3);
    return p;
}

json persona_to_json(const Persona& p) {
    json j;
    j["seed"] = p.seed;
    j["name"] = p.name;
    j["gender"] = p.gender;
    j["birth_date"] = date_json(p.birth_date);
    j["birth_city"] = p.birth_city;
    j["mother"] = p.mother;
    j["father"] = p.father;
    j["partner"] = p.partner ? json(*p.partner) : json();
    j["wedding_date"] = p.wedding_date ? json(date_json(*p.wedding_date)) : json();
    j["siblings"] = p.siblings;
    j["kids"] = json::array();
    for (const auto& k : p.kids) j["kids"].push_back({{"name", k.name}, {"birth", date_json(k.birth)}});
    j["pets"] = json::array();
    for (const auto& pet : p.pets)
        j["pets"].push_back({{"name", pet.name},
                             {"kind", pet.kind},
                             {"start", date_json(pet.start)},
                             {"end", pet.end ? json(date_json(*pet.end)) : json()}});
    j["friends"] = p.friends;
    for (auto [key, stages] : {std::pair{"education", &p.education}, std::pair{"career", &p.career},
                               std::pair{"residences", &p.residences}}) {
        j[key] = json::array();
        for (const auto& s : *stages) j[key].push_back(stage_json(s));
    }
    j["music_genres"] = p.music_genres;
    j["movie_genres"] = p.movie_genres;
    j["tv_genres"] = p.tv_genres;
    j["shopping_categories"] = p.shopping_categories;
    j["travel_countries"] = p.travel_countries;
    j["cuisines"] = p.cuisines;
    j["hobbies"] = p.hobbies;
    j["workouts"] = p.workouts;
    j["favorite_artists"] = p.favorite_artists;
    j["favorite_songs"] = p.favorite_songs;
    j["favorite_series"] = p.favorite_series;
    const auto& f = p.frequencies;
    j["frequencies"] = {{"songs_per_day", f.songs_per_day},
                        {"movies_per_week", f.movies_per_week},
                        {"episodes_per_week", f.episodes_per_week},
                        {"workouts_per_week", f.workouts_per_week},
                        {"purchases_per_month", f.purchases_per_month},
                        {"meetings_per_month", f.meetings_per_month},
                        {"doctor_visits_per_year", f.doctor_visits_per_year},
                        {"trips_per_year", f.trips_per_year}};
    return j;
}

// ------------------------------------------------------------ event types

std::string_view event_type_name(EventType t) noexcept {
    switch (t) {
        case EventType::anniversary: return "anniversary";
        case EventType::doctor: return "doctor";
        case EventType::milestone: return "milestone";
        case EventType::travel: return "travel";
        case EventType::meeting: return "meeting";
        case EventType::music: return "music";
        case EventType::movie: return "movie";
        case EventType::tvseries: return "tvseries";
        case EventType::purchase: return "purchase";
        case EventType::workout: return "workout";
    }
    return "?";
}

std::optional<EventType> parse_event_type(std::string_view s) noexcept {
    for (auto t : kAllEventTypes)
        if (event_type_name(t) == s) return t;
    return std::nullopt;
}

bool is_structured(EventType t) noexcept {
    switch (t) {
        case EventType::music:
        case EventType::movie:
        case EventType::tvseries:
        case EventType::purchase:
        case EventType::workout: return true;
        default: return false;
    }
}

Source structured_source(EventType t) {
    switch (t) {
        case EventType::music: return Source::music_stream;
        case EventType::movie: return Source::movie_stream;
        case EventType::tvseries: return Source::tvseries_stream;
        case EventType::purchase: return Source::online_purchase;
        case EventType::workout: return Source::workout;
        default: throw Error("UnknownMode", std::string(event_type_name(t)) + " has no structured source");
    }
}

const std::vector<std::string>& schema_keys(EventType t) {
    static const std::map<EventType, std::vector<std::string>> k = {
        {EventType::anniversary, {"occasion", "person"}},
        {EventType::doctor, {"doctor_type", "doctor_name", "clinic"}},
        {EventType::milestone, {"milestone", "detail"}},
        {EventType::travel, {"destination", "country", "activity"}},
        {EventType::meeting, {"participants", "location", "venue_type", "cuisine"}},
        {EventType::music, {"song_title", "artist", "genre"}},
        {EventType::movie, {"movie_title", "genre"}},
        {EventType::tvseries, {"tvseries_title", "genre", "season", "episode_number"}},
        {EventType::purchase, {"product", "category", "quantity", "price"}},
        {EventType::workout, {"workout_type", "duration_minutes", "calories", "max_heart_rate"}},
    };
    return k.at(t);
}

json GenerationConfig::to_json() const {
    return {{"period_first", format_date(period.first)},
            {"period_last", format_date(period.last)},
            {"rate_scale", rate_scale},
            {"p_struct", p_struct},
            {"p_extra_verbalization", p_extra_verbalization}};
}

GenerationConfig GenerationConfig::from_json(const json& j) {
    GenerationConfig c;
    auto date = [&](const char* key, Date& out) {
        if (!j.contains(key)) return;
        auto d = parse_iso_date(j.at(key).get<std::string>());
        if (!d) throw Error("ConfigError", std::string("bad date for ") + key);
        out = *d;
    };
    date("period_first", c.period.first);
    date("period_last", c.period.last);
    c.rate_scale = j.value("rate_scale", c.rate_scale);
    c.p_struct = j.value("p_struct", c.p_struct);
    c.p_extra_verbalization = j.value("p_extra_verbalization", c.p_extra_verbalization);
    return c;
}

// ------------------------------------------------------- canonical events

namespace {

DateTime at_time(Date d, int h, int m, int s = 0) { return DateTime{d.days * 86400 + h * 3600 + m * 60 + s}; }
DateTime plus(DateTime t, int64_t seconds) { return DateTime{t.seconds + seconds}; }

struct Staged {
    CanonicalEvent ev;
    size_t seq;
};

class Generator {
public:
    Generator(const Persona& p, const GenerationConfig& cfg, uint64_t seed)
        : p_(p), cfg_(cfg), r_(detail::mix(seed, "canonical")) {}

    std::vector<CanonicalEvent> run() {
        plan_trips();
        for (Date d = cfg_.period.first; d <= cfg_.period.last; d = Date{d.days + 1}) day(d);
        anniversaries();
        milestones();
        std::sort(out_.begin(), out_.end(), [](const Staged& a, const Staged& b) {
            return std::tie(a.ev.span.start, a.seq) < std::tie(b.ev.span.start, b.seq);
        });
        std::vector<CanonicalEvent> res;
        res.reserve(out_.size());
        char buf[32];
        for (size_t i = 0; i < out_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "c%07zu", i + 1);
            out_[i].ev.id = buf;
            res.push_back(std::move(out_[i].ev));
        }
        return res;
    }

private:
    double rate(double per_day) const { return std::max(0.0, per_day * cfg_.rate_scale); }

    void add(EventType t, std::string subtype, TimeSpan span, Attrs attrs) {
        for (const auto& k : schema_keys(t))
            if (!attrs.count(k)) attrs[k] = Value();
        out_.push_back({CanonicalEvent{"", t, std::move(subtype), span, std::move(attrs)}, out_.size()});
    }

    bool on_trip(Date d) const {
        return std::any_of(trips_.begin(), trips_.end(),
                           [&](const auto& t) { return t.first <= d && d <= t.second; });
    }

    void plan_trips() {
        const double p_start = rate(p_.frequencies.trips_per_year / 365.0);
        for (Date d = cfg_.period.first; d <= cfg_.period.last; d = Date{d.days + 1}) {
            if (!r_.chance(p_start)) continue;
            int len = r_.uniform(3, 9);
            Date end{d.days + len - 1};
            if (cfg_.period.last < end) break;
            std::string country = r_.chance(0.8) ? r_.pick(p_.travel_countries)
                                                 : std::string(r_.pick(vocab::kCities).country);
            std::vector<std::string> cities;
            for (const auto& c : vocab::kCities)
                if (c.country == country) cities.emplace_back(c.name);
            std::string city = r_.pick(cities);
            add(EventType::travel, "trip", {at_time(d, 8, 0), at_time(end, 20, 0)},
                {{"destination", Value(city)}, {"country", Value(country)}});
            std::vector<int> offsets;
            for (int i = 0; i < len; ++i) offsets.push_back(i);
            r_.shuffle(offsets);
            offsets.resize(static_cast<size_t>(r_.uniform(2, std::min(5, len))));
            std::sort(offsets.begin(), offsets.end());
            for (int off : offsets) {
                DateTime s = at_time(Date{d.days + off}, r_.uniform(11, 15), 5 * r_.uniform(0, 11));
                add(EventType::travel, "activity", {s, plus(s, 3600 + 60 * r_.uniform(0, 60))},
                    {{"destination", Value(city)},
                     {"country", Value(country)},
                     {"activity", Value(std::string(r_.pick(pools::kSights)))}});
            }
            trips_.push_back({d, end});
            d = Date{end.days + 7};  // at least a week between trips
        }
    }

    // One music stream session of at most `n` songs inside [start, limit].
    void session(DateTime start, int n, DateTime limit) {
        DateTime t = start;
        for (int i = 0; i < n; ++i) {
            std::string artist;
            double u = r_.real();
            if (u < 0.55) {
                artist = r_.pick(p_.favorite_artists);
            } else if (u < 0.9) {
                std::vector<std::string> pool;
                for (const auto& a : pools::kArtists)
                    if (std::count(p_.music_genres.begin(), p_.music_genres.end(), a.genre)) pool.emplace_back(a.name);
                artist = r_.pick(pool);
            } else {
                artist = std::string(r_.pick(pools::kArtists).name);
            }
            std::string genre;
            for (const auto& a : pools::kArtists)
                if (a.name == artist) genre = std::string(a.genre);
            std::string title = detail::song_title(artist, r_.uniform(0, 7));
            DateTime end = plus(t, detail::song_seconds(artist, title));
            if (limit < end) break;
            add(EventType::music, "", {t, end},
                {{"song_title", Value(title)}, {"artist", Value(artist)}, {"genre", Value(genre)}});
            t = plus(end, r_.uniform(1, 20));
        }
    }

    void day(Date d) {
        const auto& f = p_.frequencies;
        const bool away = on_trip(d);

        // Music: a morning and an evening session.
        int songs = r_.poisson(rate(f.songs_per_day));
        if (songs > 0) {
            int morning = std::min(20, static_cast<int>(std::lround(songs * r_.real(0.2, 0.6))));
            int evening = std::min(30, songs - morning);
            session(at_time(d, 7, r_.uniform(0, 30)), morning, at_time(d, 9, 30));
            session(at_time(d, 19, 30 + r_.uniform(0, 60)), evening, at_time(d, 23, 59, 59));
        }

        // Workout in the late afternoon, sometimes with music.
        if (r_.chance(rate(f.workouts_per_week / 7.0))) {
            const std::string& w = r_.pick(p_.workouts);
            static const std::map<std::string, std::array<int, 4>> prof = {
                // min duration, max duration, kcal per 10 min, max heart rate base
                {"running", {30, 70, 110, 165}},  {"cycling", {45, 100, 90, 155}}, {"swimming", {30, 60, 95, 150}},
                {"football", {60, 100, 100, 170}}, {"yoga", {45, 75, 40, 115}},    {"gym", {45, 90, 70, 145}},
                {"tennis", {45, 90, 85, 160}},    {"hiking", {60, 100, 60, 135}}};
            const auto& pr = prof.at(w);
            int minutes = r_.uniform(pr[0], pr[1]);
            int kcal = static_cast<int>(std::lround(minutes * pr[2] / 10.0 * r_.real(0.9, 1.1)));
            int hr = pr[3] + r_.uniform(0, 25);
            DateTime s = at_time(d, 17, r_.uniform(0, 30));
            DateTime e = plus(s, 60LL * minutes);
            add(EventType::workout, "", {s, e},
                {{"workout_type", Value(w)},
                 {"duration_minutes", Value(int64_t{minutes})},
                 {"calories", Value(int64_t{kcal})},
                 {"max_heart_rate", Value(int64_t{hr})}});
            if ((w == "running" || w == "cycling" || w == "gym") && r_.chance(0.6))
                session(plus(s, 120), 40, e);
        }

        if (r_.chance(std::min(1.0, rate(f.movies_per_week / 7.0)))) {
            std::vector<std::string> liked, any;
            for (const auto& m : pools::kMovies) {
                any.emplace_back(m.title);
                if (std::count(p_.movie_genres.begin(), p_.movie_genres.end(), m.genre)) liked.emplace_back(m.title);
            }
            std::string title = r_.chance(0.8) && !liked.empty() ? r_.pick(liked) : r_.pick(any);
            std::string genre;
            for (const auto& m : pools::kMovies)
                if (m.title == title) genre = std::string(m.genre);
            DateTime s = at_time(d, 21, r_.uniform(0, 45));
            add(EventType::movie, "", {s, plus(s, 60LL * r_.uniform(85, 140))},
                {{"movie_title", Value(title)}, {"genre", Value(genre)}});
        }

        int episodes = std::min(4, r_.poisson(rate(f.episodes_per_week / 7.0)));
        DateTime t = at_time(d, 22, r_.uniform(0, 15));
        for (int i = 0; i < episodes; ++i) {
            std::string title = r_.chance(0.8) ? r_.pick(p_.favorite_series)
                                               : std::string(r_.pick(pools::kSeries).title);
            std::string genre;
            for (const auto& s : pools::kSeries)
                if (s.title == title) genre = std::string(s.genre);
            auto& [season, episode] = progress_[title];
            if (season == 0 || episode >= 10) {
                ++season;
                episode = 0;
            }
            ++episode;
            int minutes = genre == "comedy" || genre == "animation" ? 25 : 45;
            DateTime e = plus(t, 60LL * minutes);
            add(EventType::tvseries, "", {t, e},
                {{"tvseries_title", Value(title)},
                 {"genre", Value(genre)},
                 {"season", Value(int64_t{season})},
                 {"episode_number", Value(int64_t{episode})}});
            t = plus(e, 60LL * r_.uniform(1, 5));
        }

        int purchases = std::min(3, r_.poisson(rate(f.purchases_per_month / 30.0)));
        std::set<int> minutes_used;
        for (int i = 0; i < purchases; ++i) {
            int m = r_.uniform(9 * 60, 22 * 60 + 59);
            if (!minutes_used.insert(m).second) continue;
            std::vector<const pools::Product*> liked, any;
            for (const auto& pr : pools::kProducts) {
                any.push_back(&pr);
                if (std::count(p_.shopping_categories.begin(), p_.shopping_categories.end(), pr.category))
                    liked.push_back(&pr);
            }
            const pools::Product* pr = r_.chance(0.8) ? r_.pick(liked) : r_.pick(any);
            int q = r_.chance(0.7) ? 1 : (r_.chance(0.67) ? 2 : 3);
            double price = std::round(pr->price * q * 100) / 100;
            DateTime s = at_time(d, m / 60, m % 60, r_.uniform(0, 59));
            add(EventType::purchase, "", {s, s},
                {{"product", Value(std::string(pr->name))},
                 {"category", Value(std::string(pr->category))},
                 {"quantity", Value(int64_t{q})},
                 {"price", Value(price)}});
        }

        if (!away) {
            int meetings = std::min(2, r_.poisson(rate(f.meetings_per_month / 30.0)));
            std::vector<std::string> kinds{"walk", "lunch", "coffee", "dinner"};
            r_.shuffle(kinds);
            for (int i = 0; i < meetings; ++i) meeting(d, kinds[i]);
            if (r_.chance(rate(f.doctor_visits_per_year / 365.0))) doctor(d);
        }
    }

    void meeting(Date d, const std::string& kind) {
        auto everyone = p_.people();
        std::vector<std::string> family(everyone.begin(), everyone.end() - static_cast<long>(p_.friends.size()));
        std::set<std::string> chosen;
        int n = r_.pick(std::array<int, 6>{1, 1, 1, 2, 2, 3});
        for (int i = 0; i < n; ++i) chosen.insert(r_.chance(0.5) ? r_.pick(p_.friends) : r_.pick(family));
        Value::List participants;
        for (const auto& who : everyone)
            if (chosen.count(who)) participants.emplace_back(who);

        std::string venue, location;
        Value cuisine;
        DateTime s, e;
        if (kind == "lunch" || kind == "dinner") {
            venue = "restaurant";
            location = std::string(r_.pick(pools::kRestaurants));
            cuisine = Value(r_.chance(0.8) ? r_.pick(p_.cuisines) : std::string(r_.pick(vocab::kCuisines).name));
            s = kind == "lunch" ? at_time(d, 12, 0) : at_time(d, 20, 0);
            e = plus(s, 60LL * r_.uniform(60, 110));
        } else if (kind == "coffee") {
            venue = "cafe";
            location = std::string(r_.pick(pools::kCafes));
            s = at_time(d, 15, 0);
            e = plus(s, 60LL * r_.uniform(30, 60));
        } else {
            venue = "park";
            location = std::string(r_.pick(pools::kParks));
            s = at_time(d, 10, 0);
            e = plus(s, 60LL * r_.uniform(45, 90));
        }
        add(EventType::meeting, kind, {s, e},
            {{"participants", Value(std::move(participants))},
             {"location", Value(location)},
             {"venue_type", Value(venue)},
             {"cuisine", cuisine}});
    }

    void doctor(Date d) {
        std::vector<const pools::Doctor*> kinds;
        for (const auto& k : pools::kDoctors) {
            if (k.kind == "paediatrician" && p_.kids.empty()) continue;
            if (k.kind == "veterinarian" && p_.pets.empty()) continue;
            kinds.push_back(&k);
        }
        const auto* k = r_.pick(kinds);
        // One doctor and clinic per specialty and persona.
        uint64_t h = detail::mix(p_.seed, k->kind);
        std::string name = "Dr. " + std::string(pools::kLastNames[h % pools::kLastNames.size()]);
        std::string clinic(pools::kClinics[(h / 31) % pools::kClinics.size()]);
        DateTime s = plus(at_time(d, 8, 0), 1800LL * r_.uniform(0, 16));
        add(EventType::doctor, std::string(k->kind), {s, plus(s, 60LL * (r_.chance(0.5) ? 30 : 45))},
            {{"doctor_type", Value(std::string(k->kind))},
             {"doctor_name", Value(name)},
             {"clinic", Value(clinic)}});
    }

    void anniversaries() {
        auto civ_first = civil_from_days(cfg_.period.first.days), civ_last = civil_from_days(cfg_.period.last.days);
        auto all_day = [](Date d) { return TimeSpan{at_time(d, 0, 0), at_time(d, 23, 59, 59)}; };
        for (int y = civ_first.year; y <= civ_last.year; ++y) {
            auto yearly = [&](Date origin, const std::string& occasion, const std::string& person) {
                auto c = civil_from_days(origin.days);
                if (!valid_civil(y, c.month, c.day)) return;
                Date d = make_date(y, c.month, c.day);
                if (d <= origin || d < cfg_.period.first || cfg_.period.last < d) return;
                add(EventType::anniversary, occasion, all_day(d),
                    {{"occasion", Value(occasion)}, {"person", Value(person)}});
            };
            yearly(p_.birth_date, "birthday", p_.name);
            for (const auto& k : p_.kids) yearly(k.birth, "birthday", k.name);
            if (p_.wedding_date) yearly(*p_.wedding_date, "wedding anniversary", *p_.partner);
            for (const auto& pet : p_.pets)
                if (!pet.end) yearly(pet.start, "adoption day", pet.name);
        }
    }

    void milestones() {
        auto in_period = [&](Date d) { return cfg_.period.first <= d && d <= cfg_.period.last; };
        auto put = [&](Date d, const std::string& kind, const std::string& detail) {
            if (!in_period(d)) return;
            DateTime s = at_time(d, 9, 0);
            add(EventType::milestone, kind, {s, s}, {{"milestone", Value(kind)}, {"detail", Value(detail)}});
        };
        for (const auto& s : p_.career) put(s.start, "new job", s.what + ", " + s.organization);
        for (const auto& s : p_.residences) put(s.start, "moved", s.what + ", " + s.city);
        for (const auto& s : p_.education) {
            put(s.start, "started studies", s.organization);
            if (s.end) put(*s.end, "graduation", s.organization);
        }
        if (p_.wedding_date) put(*p_.wedding_date, "wedding", *p_.partner);
        for (const auto& k : p_.kids) put(k.birth, "birth", k.name);
        for (const auto& pet : p_.pets) put(pet.start, "new pet", pet.name + ", " + pet.kind);
    }

    const Persona& p_;
    const GenerationConfig& cfg_;
    Rng r_;
    std::vector<Staged> out_;
    std::vector<std::pair<Date, Date>> trips_;
    std::map<std::string, std::pair<int, int>> progress_;
};

}  // namespace

std::vector<CanonicalEvent> generate_canonical_events(const Persona& p, const GenerationConfig& cfg, uint64_t seed) {
    if (cfg.period.last < cfg.period.first || add_years(cfg.period.first, 1).days - 1 > cfg.period.last.days)
        throw Error("ConfigError", "generation period must span at least one year");
    if (cfg.rate_scale < 0) throw Error("ConfigError", "rate_scale must be non-negative");
    return Generator(p, cfg, seed).run();
}

EventStore canonical_store(const std::vector<CanonicalEvent>& canonical) {
    StoreBuilder b;
    for (const auto& c : canonical) {
        Source src = is_structured(c.type) ? structured_source(c.type) : Source::calendar;
        if (!b.add(Event::make(c.id, src, c.span, c.attrs)))
            throw Error("ConfigError", "canonical event " + c.id + " violates store invariants");
    }
    return b.finalize();
}

}  // namespace optree::persona
