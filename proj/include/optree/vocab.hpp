#pragma once

// Bundled entity pools shared by the synthetic generator and the rule-based
// value generator. Swapping a pool changes both sides consistently.

#include <array>
#include <string_view>

namespace optree::vocab {

struct Cuisine {
    std::string_view name;
    std::array<std::string_view, 3> dishes;
};

inline constexpr std::array<Cuisine, 12> kCuisines = {{
    {"Italian", {"pizza", "pasta", "risotto"}},
    {"Japanese", {"sushi", "ramen", "tempura"}},
    {"Mexican", {"tacos", "burrito", "quesadilla"}},
    {"Indian", {"curry", "naan", "biryani"}},
    {"Chinese", {"dumplings", "chow mein", "spring rolls"}},
    {"French", {"croissant", "ratatouille", "crepes"}},
    {"Greek", {"gyros", "souvlaki", "moussaka"}},
    {"Thai", {"pad thai", "tom yum", "satay"}},
    {"Spanish", {"paella", "tapas", "churros"}},
    {"American", {"burger", "hot dog", "barbecue"}},
    {"Vietnamese", {"pho", "banh mi", "summer rolls"}},
    {"Turkish", {"kebab", "baklava", "pide"}},
}};

inline constexpr std::array<std::string_view, 12> kMusicGenres = {
    "pop", "rock", "jazz", "hip hop", "classical", "electronic", "country", "reggae", "blues", "metal", "folk", "soul"};

inline constexpr std::array<std::string_view, 10> kScreenGenres = {
    "action", "comedy", "drama", "horror", "thriller", "romance", "animation", "documentary", "crime", "fantasy"};

inline constexpr std::array<std::string_view, 8> kWorkoutTypes = {
    "running", "cycling", "swimming", "football", "yoga", "gym", "tennis", "hiking"};

inline constexpr std::array<std::string_view, 8> kShoppingCategories = {
    "electronics", "books", "clothing", "groceries", "toys", "kitchen", "beauty", "garden"};

inline constexpr std::array<std::string_view, 5> kVenueTypes = {"restaurant", "cafe", "park", "bar", "cinema"};

struct City {
    std::string_view name;
    std::string_view country;
};

inline constexpr std::array<City, 16> kCities = {{
    {"Lisbon", "Portugal"},     {"Madrid", "Spain"},       {"Barcelona", "Spain"},    {"Rome", "Italy"},
    {"Florence", "Italy"},      {"Paris", "France"},       {"Athens", "Greece"},      {"Berlin", "Germany"},
    {"Munich", "Germany"},      {"Vienna", "Austria"},     {"Prague", "Czechia"},     {"Amsterdam", "Netherlands"},
    {"Denpasar", "Indonesia"},  {"Tokyo", "Japan"},        {"Bangkok", "Thailand"},   {"New York", "United States"},
}};

}  // namespace optree::vocab
