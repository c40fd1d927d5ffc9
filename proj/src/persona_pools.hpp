#pragma once

// Static entity pools for the synthetic generator. Names avoid every
// vocabulary term the rule extractor matches (genres, cuisines and dishes,
// cities, workouts, shopping categories) and contain no "at"/"by" so that
// verbalized text extracts back to the canonical values.

#include <array>
#include <string_view>

namespace optree::persona::pools {

inline constexpr std::array<std::string_view, 40> kFirstNames = {
    "Carla", "Lucia", "Isabella", "Marco", "Elena", "Tomas", "Ingrid", "Yusuf", "Amara", "Kenji",
    "Priya", "Mateo", "Sofia",   "Lars",   "Nadia", "Omar",  "Hanna",  "Diego", "Freya", "Ravi",
    "Leila", "Anton", "Greta",   "Kofi",   "Mila",  "Jonas", "Zara",   "Emil",  "Ines",  "Bruno",
    "Alina", "Felix", "Noor",    "Oskar",  "Vera",  "Luca",  "Selin",  "Hugo",  "Maya",  "Pablo"};

inline constexpr std::array<std::string_view, 20> kLastNames = {
    "Díaz",   "Ruiz",      "Hernández", "Rossi",  "Weber",   "Novak",   "Silva",    "Tanaka", "Okafor", "Larsen",
    "Kowalski", "Haddad",  "Moreau",    "Jensen", "Costa",   "Schmidt", "Ivanova",  "Patel",  "Sato",   "Berg"};

struct Artist {
    std::string_view name;
    std::string_view genre;
};

inline constexpr std::array<Artist, 36> kArtists = {{
    {"Nova Lights", "pop"},        {"Marina Cole", "pop"},         {"The Paper Moons", "pop"},
    {"Iron Willow", "rock"},       {"The Static Kings", "rock"},   {"Red Canyon", "rock"},
    {"Miles Avery Trio", "jazz"},  {"Blue Lantern", "jazz"},       {"Ruth Calloway", "jazz"},
    {"MC Orbit", "hip hop"},       {"Lyric Saint", "hip hop"},     {"Concrete Poets", "hip hop"},
    {"Aurora Strings", "classical"}, {"Aurelia Quartet", "classical"}, {"Henrik Olsen", "classical"},
    {"Pulse Theory", "electronic"}, {"Neon Harbor", "electronic"}, {"Kilowatt", "electronic"},
    {"Dusty Hollow", "country"},   {"Jolene Parker", "country"},   {"The Prairie Line", "country"},
    {"Island Roots", "reggae"},    {"Kingston Sun", "reggae"},     {"Irie Waves", "reggae"},
    {"Muddy Creek", "blues"},      {"Delta Ray", "blues"},         {"Big Mama Lou", "blues"},
    {"Black Anvil", "metal"},      {"Grimhold", "metal"},          {"Steel Tempest", "metal"},
    {"The Wandering Oaks", "folk"}, {"Ada Thornfield", "folk"},    {"Willow Creek Band", "folk"},
    {"Velvet Avenue", "soul"},     {"Otis Grant", "soul"},         {"The Satin Hearts", "soul"},
}};

inline constexpr std::array<std::string_view, 24> kTitleWords1 = {
    "Midnight", "Golden", "Silent", "Electric", "Paper", "Velvet", "Crystal", "Broken",
    "Summer",   "Neon",   "Wild",   "Hidden",   "Lonely", "Burning", "Frozen", "Distant",
    "Sweet",    "Secret", "Endless", "Restless", "Gentle", "Falling", "Rising", "Fading"};
inline constexpr std::array<std::string_view, 24> kTitleWords2 = {
    "Train",  "Hour",  "River", "Dreams",  "Lights", "Hearts", "Roads",  "Skies",
    "Fire",   "Waves", "Echoes", "Shadows", "Letters", "Anthem", "Streets", "Mirrors",
    "Thunder", "Horizon", "Promise", "Rain", "Stars", "Doors", "Voices", "Island"};

struct Screen {
    std::string_view title;
    std::string_view genre;
};

inline constexpr std::array<Screen, 30> kMovies = {{
    {"Beverly Hills Cop III", "action"}, {"Steel Horizon", "action"},     {"Last Stand West", "action"},
    {"Laugh Track", "comedy"},           {"The Wedding Mixup", "comedy"}, {"Uncle Ferdinand", "comedy"},
    {"Quiet Harbour", "drama"},          {"The Long Winter", "drama"},    {"Paper Houses", "drama"},
    {"The Hollow Door", "horror"},       {"Night Visitors", "horror"},    {"Crawlspace", "horror"},
    {"Double Cross", "thriller"},        {"The Informant Game", "thriller"}, {"Blackout City", "thriller"},
    {"Letters To Juliet", "romance"},    {"Two Summers", "romance"},      {"Moonlit Promise", "romance"},
    {"Cloud Kingdom", "animation"},      {"The Brave Toaster", "animation"}, {"Pixel Pals", "animation"},
    {"Planet Deep", "documentary"},      {"The Bee Year", "documentary"}, {"Mountains Of Salt", "documentary"},
    {"Gangland", "crime"},               {"The Heist Club", "crime"},     {"Dirty Money", "crime"},
    {"The Ninth Realm", "fantasy"},      {"Dragon Song", "fantasy"},      {"The Glass Crown", "fantasy"},
}};

inline constexpr std::array<Screen, 15> kSeries = {{
    {"Scrubs", "comedy"},          {"Office Hours", "comedy"},   {"Family Matters Again", "comedy"},
    {"Harbor Street", "drama"},    {"The Crown Estate", "drama"}, {"Northern Lights", "drama"},
    {"Dark Waters", "thriller"},   {"The Watcher", "thriller"},  {"Case Files", "crime"},
    {"Precinct Nine", "crime"},    {"Realm Of Ash", "fantasy"},  {"The Old Kingdoms", "fantasy"},
    {"Wild Planet", "documentary"}, {"Haunted Halls", "horror"}, {"Toon Town", "animation"},
}};

struct Product {
    std::string_view name;
    std::string_view category;
    double price;
};

inline constexpr std::array<Product, 32> kProducts = {{
    {"Wireless Earbuds", "electronics", 59.99}, {"USB-C Charger", "electronics", 19.99},
    {"Smart Watch", "electronics", 129.00},     {"Portable Speaker", "electronics", 45.50},
    {"The Silent Orchard", "books", 12.99},     {"Atlas Of Clouds", "books", 24.90},
    {"Cosmic Funk", "books", 5.99},             {"A Short History Of Tea", "books", 16.40},
    {"Rain Jacket", "clothing", 79.00},         {"Wool Socks", "clothing", 9.95},
    {"Linen Shirt", "clothing", 34.99},         {"Trail Sneakers", "clothing", 89.90},
    {"Coffee Beans", "groceries", 11.49},       {"Olive Oil", "groceries", 8.75},
    {"Green Tea Box", "groceries", 6.30},       {"Dark Chocolate", "groceries", 3.99},
    {"Building Blocks", "toys", 29.99},         {"Puzzle Cube", "toys", 7.49},
    {"Plush Rabbit", "toys", 14.99},            {"Kite Set", "toys", 21.00},
    {"Chef Knife", "kitchen", 42.00},           {"Cast Iron Pan", "kitchen", 38.90},
    {"Espresso Cups", "kitchen", 18.60},        {"Cutting Board", "kitchen", 15.25},
    {"Face Cream", "beauty", 22.80},            {"Shampoo", "beauty", 6.95},
    {"Lip Balm", "beauty", 3.49},               {"Perfume Sample", "beauty", 27.00},
    {"Pruning Shears", "garden", 17.99},        {"Seed Mix", "garden", 4.60},
    {"Watering Can", "garden", 12.40},          {"Hose Reel", "garden", 49.00},
}};

inline constexpr std::array<std::string_view, 12> kRestaurants = {
    "The Golden Fork", "Blue Harbor", "The Parthenon", "Casa Verde", "Lantern House", "The Copper Pot",
    "Silver Spoon", "Saffron Table", "The Olive Terrace", "Red Door Bistro", "Harvest Hall", "Moonlight Diner"};
inline constexpr std::array<std::string_view, 5> kParks = {"Central Park", "Riverside Park", "Oak Hill Park",
                                                           "Lakeside Gardens", "Botanical Park"};
inline constexpr std::array<std::string_view, 5> kCafes = {"Cafe Luna", "Morning Bloom Cafe", "The Daily Grind",
                                                           "Bean There", "Corner Cafe"};
inline constexpr std::array<std::string_view, 5> kClinics = {"Northside Clinic", "City Health Center",
                                                             "Riverside Medical", "Elm Street Practice",
                                                             "Central Clinic"};
inline constexpr std::array<std::string_view, 6> kCompanies = {"Acme Analytics", "Brightline Labs", "Nordwind Logistics",
                                                               "Helios Energy", "Quantum Retail", "Bluebird Media"};
inline constexpr std::array<std::string_view, 6> kRoles = {"Engineer", "Data Analyst", "Project Manager",
                                                           "Designer", "Consultant", "Teacher"};
inline constexpr std::array<std::string_view, 4> kSchools = {"State University", "Technical College",
                                                             "Institute of Design", "Business School"};
inline constexpr std::array<std::string_view, 6> kStreets = {"Maple Street", "Harbor Road", "Linden Avenue",
                                                             "Station Square", "Chestnut Lane", "Hill Crescent"};
inline constexpr std::array<std::string_view, 5> kPetKinds = {"dog", "cat", "rabbit", "parrot", "hamster"};
inline constexpr std::array<std::string_view, 8> kPetNames = {"Biscuit", "Pepper", "Luna", "Ziggy",
                                                              "Mochi", "Rocket", "Nala", "Oreo"};
inline constexpr std::array<std::string_view, 8> kHobbies = {"photography", "chess", "painting", "gardening",
                                                             "knitting", "board games", "baking", "pottery"};
inline constexpr std::array<std::string_view, 8> kSights = {"the old town", "the cathedral", "the harbour",
                                                            "a museum", "the market", "the castle",
                                                            "a boat tour", "the viewpoint"};

struct Doctor {
    std::string_view kind;
    std::string_view title;  // display form in text
};

inline constexpr std::array<Doctor, 6> kDoctors = {{{"dentist", "Dentist"},
                                                   {"gp", "GP"},
                                                   {"ophthalmologist", "Ophthalmologist"},
                                                   {"dermatologist", "Dermatologist"},
                                                   {"paediatrician", "Paediatrician"},
                                                   {"veterinarian", "Veterinarian"}}};

}  // namespace optree::persona::pools
