#include <array>
#include <stdexcept>
#include <string>

#include "curvecorrect/data_io.hpp"

namespace curvecorrect {

namespace {

struct Row {
    std::int64_t n;
    double accuracy;
    const char* study;
};

// Published (sample size, accuracy) pairs from meta-analyses of
// neuroimaging-based binary classification between healthy controls and a
// patient cohort. Only two-group (HC vs patient) studies are included.

constexpr std::array<Row, 31> kNiAd{{
    {45, 1.00, "grana2011computer"},
    {31, 1.00, "wu2012receiver"},
    {40, 1.00, "khazaee2015identifying"},
    {100, 0.90, "zhang2010optimally"},
    {126, 0.92, "zhang2015detection"},
    {44, 0.83, "wang2007large"},
    {380, 0.87, "vemuri2008alzheimer"},
    {62, 0.77, "polat2012computer"},
    {34, 0.88, "oliveira2010use"},
    {101, 0.77, "miller2009collaborative"},
    {60, 0.98, "mahanand2012identification"},
    {38, 0.95, "magnin2009support"},
    {39, 0.90, "li2007hippocampal"},
    {36, 0.95, "lerch2008automated"},
    {117, 0.88, "lee2014online"},
    {66, 0.91, "freeborough1998mr"},
    {85, 0.94, "farhan2014ensemble"},
    {60, 0.92, "farzan2015boosting"},
    {370, 0.95, "hidalgo2014regions"},
    {60, 1.00, "decarli1995discriminant"},
    {100, 0.93, "coupe2012simultaneous"},
    {299, 0.87, "cuingnet2012spatial"},
    {212, 0.79, "chen2014detecting"},
    {260, 0.86, "beheshti2015probability"},
    {117, 0.88, "batmanghelich2011generative"},
    {448, 0.72, "adaszewski2013early"},
    {417, 0.87, "abdulkadir2011effects"},
    {36, 0.94, "li2014discriminative"},
    {280, 0.77, "dyrba2013robust"},
    {90, 0.93, "dukart2013meta"},
    {38, 0.90, "dai2012discriminative"},
}};

constexpr std::array<Row, 57> kNiSz{{
    {90, 0.80, "caprihan2008application"},
    {58, 0.75, "caan2006shaving"},
    {100, 0.96, "ardekani2011diffusion"},
    {28, 0.96, "honorio2012can"},
    {138, 0.85, "demirci2008projection"},
    {34, 0.66, "yoon2008multivariate"},
    {102, 0.62, "yoon2012automated"},
    {88, 0.93, "koch2015diagnostic"},
    {208, 0.77, "cao2013integrating"},
    {106, 0.95, "castro2011characterization"},
    {52, 0.85, "castro2014multiple"},
    {71, 0.62, "yu2013functional"},
    {145, 0.91, "watanabe2014disease"},
    {92, 0.75, "guo2014decreased"},
    {36, 0.75, "venkataraman2012whole"},
    {44, 0.93, "tang2012identify"},
    {64, 0.83, "su2013discriminative"},
    {52, 0.86, "shen2010discriminative"},
    {100, 0.86, "kim2016deep"},
    {267, 0.80, "kaufmann2015disintegration"},
    {48, 0.80, "cheng2015nodal"},
    {18, 1.00, "fekete2013combining"},
    {62, 0.86, "fan2011discriminant"},
    {144, 0.86, "chyzhyk2015computer"},
    {58, 0.75, "bassett2012altered"},
    {56, 0.96, "arbabshirani2013classification"},
    {180, 0.74, "anticevic2014characterizing"},
    {146, 0.65, "anderson2013decreased"},
    {148, 0.71, "zhang2013optimally"},
    {124, 0.73, "zanetti2013neuroanatomical"},
    {92, 0.80, "takayanagi2011classification"},
    {72, 0.86, "sun2009elucidating"},
    {51, 0.69, "radulescu2014grey"},
    {123, 0.90, "pina2015predictors"},
    {189, 0.73, "ota2012discrimination"},
    {516, 0.71, "nieuwenhuis2012classification"},
    {104, 0.82, "nakamura2004multiple"},
    {262, 0.76, "koutsouleris2015individualized"},
    {92, 0.85, "kawasaki2007multivariate"},
    {78, 0.72, "kasparek2011maximum"},
    {75, 0.72, "karageorgiou2011neuropsychological"},
    {98, 0.82, "janousova2015combining"},
    {39, 0.72, "iwabuchi2013clinical"},
    {52, 0.78, "ingalhalikar2012identifying"},
    {197, 0.74, "greenstein2012using"},
    {412, 0.59, "gould2014multivariate"},
    {148, 0.91, "fan2006compare"},
    {61, 0.92, "fan2005classification"},
    {148, 0.81, "davatzikos2005whole"},
    {117, 0.79, "csernansky2004abnormalities"},
    {108, 0.71, "castellani2012classification"},
    {105, 0.94, "bansal2012anatomical"},
    {50, 0.80, "ota2013discrimination"},
    {56, 0.96, "du2012high"},
    {55, 0.72, "ccetin2015enhanced"},
    {40, 0.87, "yang2010hybrid"},
    {63, 0.79, "sui2013combination"},
}};

constexpr std::array<Row, 17> kNiAsd{{
    {75, 0.80, "ingalhalikar2011diffusion"},
    {34, 0.97, "just2014identifying"},
    {27, 0.96, "murdaugh2012differential"},
    {40, 0.78, "uddin2013salience"},
    {296, 0.77, "plitt2015functional"},
    {640, 0.90, "iidaka2015resting"},
    {252, 0.91, "chen2015diagnostic"},
    {80, 0.79, "anderson2011functional"},
    {117, 0.96, "wee2014diagnosis"},
    {48, 0.92, "uddin2011multivariate"},
    {38, 0.87, "jiao2010predictive"},
    {44, 0.77, "ecker2010investigating"},
    {40, 0.85, "ecker2010describing"},
    {67, 0.94, "akshoomoff2004outcome"},
    {30, 0.96, "deshpande2013identification"},
    {37, 0.92, "libero2015multimodal"},
    {280, 0.70, "zhou2014multiparametric"},
}};

constexpr std::array<Row, 20> kNiAdhd{{
    {60, 0.77, "hart2014pattern"},
    {34, 0.91, "park2016connectivity"},
    {40, 0.75, "hart2014predictive"},
    {24, 0.85, "zhu2008fisher"},
    {46, 0.80, "wang2013altered"},
    {688, 0.72, "sidhu2012kernel"},
    {929, 0.54, "sato2012evaluation"},
    {647, 0.73, "fair2013distinct"},
    {487, 0.74, "dey2012exploiting"},
    {1177, 0.90, "deshpande2015fully"},
    {110, 0.90, "peng2013extreme"},
    {58, 0.77, "lim2013disorder"},
    {68, 0.93, "johnston2014brainstem"},
    {78, 0.73, "igual2012automatic"},
    {436, 0.70, "chang2012adhd"},
    {83, 0.91, "bansal2012anatomical"},
    {748, 0.67, "anderson2014non"},
    {36, 0.69, "iannaccone2015classifying"},
    {624, 0.62, "dai2012classification"},
    {776, 0.55, "colby2012insights"},
}};

template <std::size_t N>
Dataset make_dataset(const std::array<Row, N>& rows, std::string name, std::string provenance) {
    Dataset ds;
    ds.name = std::move(name);
    ds.provenance = std::move(provenance);
    ds.records.reserve(N);
    for (const Row& row : rows) {
        AccuracyRecord rec;
        rec.n = row.n;
        rec.accuracy = row.accuracy;
        rec.study_id = row.study;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace

std::vector<std::string> bundled_names() { return {"ni_ad", "ni_sz", "ni_asd", "ni_adhd"}; }

const Dataset& bundled(std::string_view name) {
    static const Dataset ad = make_dataset(
        kNiAd, "ni_ad",
        "Neuroimaging-based HC vs. Alzheimer's disease accuracies, collected from the "
        "single-subject prediction survey of Arbabshirani et al. (2017)");
    static const Dataset sz = make_dataset(
        kNiSz, "ni_sz",
        "Neuroimaging-based HC vs. Schizophrenia accuracies, collected from the "
        "single-subject prediction survey of Arbabshirani et al. (2017)");
    static const Dataset asd = make_dataset(
        kNiAsd, "ni_asd",
        "Neuroimaging-based HC vs. Autism spectrum disorder accuracies, collected from the "
        "single-subject prediction survey of Arbabshirani et al. (2017)");
    static const Dataset adhd = make_dataset(
        kNiAdhd, "ni_adhd",
        "Neuroimaging-based HC vs. ADHD accuracies, collected from the "
        "single-subject prediction survey of Arbabshirani et al. (2017)");

    if (name == "ni_ad") return ad;
    if (name == "ni_sz") return sz;
    if (name == "ni_asd") return asd;
    if (name == "ni_adhd") return adhd;
    throw std::invalid_argument("unknown bundled dataset: " + std::string(name));
}

}  // namespace curvecorrect
