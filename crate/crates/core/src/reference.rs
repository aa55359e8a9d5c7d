//! Published reference values used by the `reproduce` drivers and the
//! acceptance suite. Values are kept as printed strings so comparisons can
//! honour the number of printed digits (one unit in the last place).

/// Row of a critical-function table: rotation number, Bryuno value,
/// critical value, running slope with error bar (absent on first rows).
#[derive(Debug, Clone, Copy)]
pub struct CriticalRow {
    pub omega: &'static str,
    pub b: &'static str,
    pub eps_c: &'static str,
    pub slope: Option<&'static str>,
    pub slope_err: Option<&'static str>,
}

const fn row(
    omega: &'static str,
    b: &'static str,
    eps_c: &'static str,
    slope: Option<&'static str>,
    slope_err: Option<&'static str>,
) -> CriticalRow {
    CriticalRow { omega, b, eps_c, slope, slope_err }
}

/// Family `[n,(1)]` approaching 0.
pub const TABLE_1: [CriticalRow; 16] = [
    row("[500,(1)]", "6.21836", "0.016585", None, None),
    row("[700,(1)]", "6.55376", "0.0121005", Some("0.9399"), Some("0.0002")),
    row("[1000,(1)]", "6.90963", "0.0086401", Some("0.9465"), Some("0.0001")),
    row("[2000,(1)]", "7.60184", "0.0044599", Some("0.9553"), Some("0.0001")),
    row("[4000,(1)]", "8.29452", "0.0022854", Some("0.9652"), Some("0.0001")),
    row("[7000,(1)]", "8.85393", "0.0013265", Some("0.9724"), Some("0.0002")),
    row("[10000,(1)]", "9.21053", "0.00093627", Some("0.9770"), Some("0.0002")),
    row("[12000,(1)]", "9.39284", "0.00078320", Some("0.9793"), Some("0.0001")),
    row("[15000,(1)]", "9.61593", "0.00062927", Some("0.9808"), Some("0.0001")),
    row("[18000,(1)]", "9.79823", "0.00052610", Some("0.9823"), Some("0.0002")),
    row("[20000,(1)]", "9.90358", "0.00047433", Some("0.9833"), Some("0.0004")),
    row("[25000,(1)]", "10.12671", "0.00038081", Some("0.9842"), Some("0.0002")),
    row("[30000,(1)]", "10.30902", "0.00031816", Some("0.9859"), Some("0.0003")),
    row("[40000,(1)]", "10.59668", "0.00023955", Some("0.9865"), Some("0.0003")),
    row("[50000,(1)]", "10.81982", "0.000192161", Some("0.9879"), Some("0.0003")),
    row("[60000,(1)]", "11.00213", "0.000160443", Some("0.9895"), Some("0.0002")),
];

/// Family `[n,20,(1)]` approaching 0.
pub const TABLE_2: [CriticalRow; 5] = [
    row("[500,20,(1)]", "6.22088", "0.016303", None, None),
    row("[700,20,(1)]", "6.55556", "0.011926", Some("0.9341"), Some("0.0004")),
    row("[1000,20,(1)]", "6.91089", "0.008535", Some("0.9415"), Some("0.0006")),
    row("[2000,20,(1)]", "7.60247", "0.004421", Some("0.9512"), Some("0.0005")),
    row("[4000,20,(1)]", "8.29483", "0.002271", Some("0.962"), Some("0.001")),
];

/// Family `[2,n,(1)]` approaching 1/2.
pub const TABLE_3: [CriticalRow; 10] = [
    row("[2,500,(1)]", "3.80022", "0.12872", None, None),
    row("[2,700,(1)]", "3.96840", "0.109967", Some("0.9362"), Some("0.0005")),
    row("[2,1000,(1)]", "4.14674", "0.092932", Some("0.9438"), Some("0.0001")),
    row("[2,2000,(1)]", "4.49337", "0.066777", Some("0.9535"), Some("0.0001")),
    row("[2,4000,(1)]", "4.84001", "0.047805", Some("0.9642"), Some("0.0001")),
    row("[2,7000,(1)]", "5.11987", "0.036420", Some("0.9720"), Some("0.0002")),
    row("[2,10000,(1)]", "5.29823", "0.030598", Some("0.9766"), Some("0.0003")),
    row("[2,13000,(1)]", "5.42943", "0.026909", Some("0.9792"), Some("0.0006")),
    row("[2,17000,(1)]", "5.56357", "0.023591", Some("0.9810"), Some("0.0006")),
    row("[2,20000,(1)]", "5.64484", "0.021780", Some("0.983"), Some("0.001")),
];

/// Family `[3,n,(1)]` approaching 1/3.
pub const TABLE_4: [CriticalRow; 10] = [
    row("[3,500,(1)]", "3.17069", "0.244787", None, None),
    row("[3,700,(1)]", "3.28264", "0.22044", Some("0.9358"), Some("0.0001")),
    row("[3,1000,(1)]", "3.40139", "0.197080", Some("0.9433"), Some("0.0001")),
    row("[3,2000,(1)]", "3.63230", "0.158153", Some("0.9529"), Some("0.0001")),
    row("[3,4000,(1)]", "3.86330", "0.126588", Some("0.9637"), Some("0.0001")),
    row("[3,7000,(1)]", "4.04983", "0.105608", Some("0.9715"), Some("0.0001")),
    row("[3,10000,(1)]", "4.16872", "0.094035", Some("0.9763"), Some("0.0002")),
    row("[3,13000,(1)]", "4.25617", "0.086319", Some("0.9787"), Some("0.0003")),
    row("[3,17000,(1)]", "4.34559", "0.079072", Some("0.9807"), Some("0.0003")),
    row("[3,20000,(1)]", "4.39977", "0.074973", Some("0.9826"), Some("0.0005")),
];

/// Critical residues for constant-type rotation numbers.
#[derive(Debug, Clone, Copy)]
pub struct CriticalResidueRow {
    pub omega: &'static str,
    pub eps_c: &'static str,
    pub r_infinity: &'static str,
}

pub const TABLE_5: [CriticalResidueRow; 8] = [
    CriticalResidueRow { omega: "[(1)]", eps_c: "0.971635406", r_infinity: "0.250088" },
    CriticalResidueRow { omega: "[(2)]", eps_c: "0.957445408", r_infinity: "0.2275138" },
    CriticalResidueRow { omega: "[(3)]", eps_c: "0.890863502", r_infinity: "0.202230" },
    CriticalResidueRow { omega: "[(4)]", eps_c: "0.80472544", r_infinity: "0.17923" },
    CriticalResidueRow { omega: "[10,(2)]", eps_c: "0.481985986", r_infinity: "0.22751" },
    CriticalResidueRow { omega: "[1,3,(2)]", eps_c: "0.829500533", r_infinity: "0.22751" },
    CriticalResidueRow { omega: "[7,(3)]", eps_c: "0.615071885", r_infinity: "0.2022" },
    CriticalResidueRow { omega: "[1,2,(4)]", eps_c: "0.86423037", r_infinity: "0.1792" },
];

/// One approximant row of a critical-residue sequence table.
#[derive(Debug, Clone, Copy)]
pub struct ApproximantResidue {
    pub p: u64,
    pub q: u64,
    pub residue: &'static str,
}

const fn ar(p: u64, q: u64, residue: &'static str) -> ApproximantResidue {
    ApproximantResidue { p, q, residue }
}

/// `omega = sqrt(3) - 1 = [(1,2)]` at `eps_c = 0.876067426`.
pub const TABLE_6_EPS: &str = "0.876067426";
pub const TABLE_6: [ApproximantResidue; 16] = [
    ar(3, 4, "0.24871"),
    ar(8, 11, "0.18612"),
    ar(11, 15, "0.25216"),
    ar(30, 41, "0.18516"),
    ar(41, 56, "0.25275"),
    ar(112, 153, "0.18493"),
    ar(153, 209, "0.25288"),
    ar(418, 571, "0.18487"),
    ar(571, 780, "0.25291"),
    ar(1560, 2131, "0.18486"),
    ar(2131, 2911, "0.25292"),
    ar(5822, 7953, "0.18485"),
    ar(7953, 10864, "0.25292"),
    ar(21728, 29681, "0.18485"),
    ar(29681, 40545, "0.25292"),
    ar(81090, 110771, "0.18486"),
];

/// `omega = (sqrt(3) - 1)/2 = [(2,1)]` at `eps_c = 0.9402827`.
pub const TABLE_7_EPS: &str = "0.9402827";
pub const TABLE_7: [ApproximantResidue; 16] = [
    ar(3, 8, "0.19574"),
    ar(4, 11, "0.24746"),
    ar(11, 30, "0.18763"),
    ar(15, 41, "0.25145"),
    ar(41, 112, "0.18556"),
    ar(56, 153, "0.25254"),
    ar(153, 418, "0.18503"),
    ar(209, 571, "0.25282"),
    ar(571, 1560, "0.18490"),
    ar(780, 2131, "0.25290"),
    ar(2131, 5822, "0.18486"),
    ar(2911, 7953, "0.25292"),
    ar(7953, 21728, "0.18486"),
    ar(10864, 29681, "0.25292"),
    ar(29681, 81090, "0.18486"),
    ar(40545, 110771, "0.25293"),
];

/// `omega = sqrt(5/2) - 1 = [(1,1,2)]`; the printed critical value
/// duplicates the previous table's and is treated as unverified input.
pub const TABLE_8_EPS: &str = "0.9402827";
pub const TABLE_8: [ApproximantResidue; 18] = [
    ar(3, 5, "0.2242"),
    ar(4, 7, "0.2639"),
    ar(7, 12, "0.2278"),
    ar(18, 31, "0.2222"),
    ar(25, 43, "0.2660"),
    ar(43, 74, "0.2270"),
    ar(111, 191, "0.2227"),
    ar(154, 265, "0.2656"),
    ar(265, 456, "0.2272"),
    ar(684, 1177, "0.2226"),
    ar(949, 1633, "0.2656"),
    ar(1633, 2810, "0.2271"),
    ar(4215, 7253, "0.2227"),
    ar(5848, 10063, "0.2656"),
    ar(10063, 17316, "0.2271"),
    ar(25974, 44695, "0.2227"),
    ar(36037, 62011, "0.2656"),
    ar(62011, 106706, "0.2272"),
];

/// Radius-of-convergence row: heuristic and Pade values with slopes
/// (`slope_rho1/slope_rho_p`, absent on first rows).
#[derive(Debug, Clone, Copy)]
pub struct RadiusRow {
    pub omega: &'static str,
    pub eta: &'static str,
    pub rho1: &'static str,
    pub rho_p: Option<&'static str>,
    pub slope_rho1: Option<&'static str>,
    pub slope_rho_p: Option<&'static str>,
}

const fn rr(
    omega: &'static str,
    eta: &'static str,
    rho1: &'static str,
    rho_p: Option<&'static str>,
    slope_rho1: Option<&'static str>,
    slope_rho_p: Option<&'static str>,
) -> RadiusRow {
    RadiusRow { omega, eta, rho1, rho_p, slope_rho1, slope_rho_p }
}

/// `[2,n,(1)]`, radius near 1/2, Pade order [240/240] in the source.
pub const TABLE_9: [RadiusRow; 7] = [
    rr("[2,10,(1)]", "0.0224860", "0.51409", Some("0.51052"), None, None),
    rr("[2,12,(1)]", "0.0190577", "0.43571", Some("0.43355"), Some("2.19667"), Some("2.17013")),
    rr("[2,15,(1)]", "0.0155106", "0.35462", Some("0.35352"), Some("2.14426"), Some("2.12464")),
    rr("[2,20,(1)]", "0.0118382", "0.27066", Some("0.27024"), Some("2.09658"), Some("2.08449")),
    rr("[2,30,(1)]", "0.0080339", "0.18368", Some("0.18361"), Some("2.05439"), Some("2.04822")),
    rr("[2,40,(1)]", "0.0060801", "0.13901", Some("0.13902"), Some("2.02821"), Some("2.02484")),
    rr("[2,50,(1)]", "0.0048906", "0.11181", Some("0.11184"), Some("2.01612"), Some("2.01480")),
];

/// `[3,n,(1)]`, radius near 1/3.
pub const TABLE_10: [RadiusRow; 9] = [
    rr("[3,10,(1)]", "0.0101459", "0.62329", Some("0.61993"), None, None),
    rr("[3,12,(1)]", "0.0085791", "0.55734", Some("0.55524"), Some("2.28295"), Some("2.24934")),
    rr("[3,13,(1)]", "0.0079642", "0.53038", Some("0.52858"), Some("2.23762"), Some("2.22067")),
    rr("[3,20,(1)]", "0.0053033", "0.40444", Some("0.40400"), Some("2.17212"), Some("2.15360")),
    rr("[3,30,(1)]", "0.0035899", "0.31180", Some("0.31182"), Some("2.09982"), Some("2.09051")),
    rr("[3,40,(1)]", "0.0027132", "0.25871", Some("0.25872"), Some("2.06311"), Some("2.06339")),
    rr("[3,50,(1)]", "0.0021807", "0.22364", Some("0.22360"), Some("2.04490"), Some("2.04795")),
    rr("[3,100,(1)]", "0.0011006", "0.14177", Some("0.14179"), Some("2.02455"), Some("2.02313")),
    rr("[3,200,(1)]", "0.0005529", "0.08959", Some("0.08961"), Some("2.00902"), Some("2.00866")),
];

/// Heuristic-radius row (pure formula, deep families).
#[derive(Debug, Clone, Copy)]
pub struct Rho1Row {
    pub omega: &'static str,
    pub rho1: &'static str,
    pub slope: Option<&'static str>,
}

const fn hr(omega: &'static str, rho1: &'static str, slope: Option<&'static str>) -> Rho1Row {
    Rho1Row { omega, rho1, slope }
}

/// `[n,(1)]` heuristic radii.
pub const TABLE_11: [Rho1Row; 15] = [
    hr("[500,(1)]", "0.000130355", None),
    hr("[700,(1)]", "0.0000665545", Some("2.0042837")),
    hr("[1000,(1)]", "0.000032629", Some("2.0030298")),
    hr("[2000,(1)]", "0.00000816229", Some("2.0018183")),
    hr("[4000,(1)]", "0.0000020412", Some("2.0009090")),
    hr("[7000,(1)]", "0.000000666603", Some("2.0004825")),
    hr("[10000,(1)]", "0.000000326653", Some("2.0003028")),
    hr("[12000,(1)]", "0.000000226847", Some("2.0002303")),
    hr("[15000,(1)]", "0.000000145185", Some("2.0001882")),
    hr("[18000,(1)]", "0.000000100824", Some("2.0001536")),
    hr("[20000,(1)]", "0.0000000816683", Some("2.0001329")),
    hr("[25000,(1)]", "0.0000000522684", Some("2.0001129")),
    hr("[30000,(1)]", "0.0000000362978", Some("2.0000921")),
    hr("[40000,(1)]", "0.0000000204177", Some("2.0000730")),
    hr("[50000,(1)]", "0.0000000130674", Some("2.0000565")),
];

/// `[2,n,(1)]` heuristic radii.
pub const TABLE_12: [Rho1Row; 10] = [
    hr("[2,500,(1)]", "0.011405915", None),
    hr("[2,700,(1)]", "0.008152279", Some("1.9968638")),
    hr("[2,1000,(1)]", "0.005709327", Some("1.9973651")),
    hr("[2,2000,(1)]", "0.002856258", Some("1.9980597")),
    hr("[2,4000,(1)]", "0.001428528", Some("1.9987793")),
    hr("[2,7000,(1)]", "0.000816400", Some("1.9992292")),
    hr("[2,10000,(1)]", "0.000571507", Some("1.9994593")),
    hr("[2,13000,(1)]", "0.000439632", Some("1.9995765")),
    hr("[2,17000,(1)]", "0.000336196", Some("1.9996572")),
    hr("[2,20000,(1)]", "0.000285770", Some("1.9997123")),
];

/// `[3,n,(1)]` heuristic radii.
pub const TABLE_13: [Rho1Row; 10] = [
    hr("[3,500,(1)]", "0.04873028", None),
    hr("[3,700,(1)]", "0.03895268", Some("2.0004598")),
    hr("[3,1000,(1)]", "0.03071760", Some("2.0000489")),
    hr("[3,2000,(1)]", "0.01935701", Some("1.9997910")),
    hr("[3,4000,(1)]", "0.01219611", Some("1.9997289")),
    hr("[3,7000,(1)]", "0.00839894", Some("1.9997744")),
    hr("[3,10000,(1)]", "0.00662168", Some("1.9998204")),
    hr("[3,13000,(1)]", "0.00555920", Some("1.9998501")),
    hr("[3,17000,(1)]", "0.00464887", Some("1.9998731")),
    hr("[3,20000,(1)]", "0.00417153", Some("1.9998900")),
];

/// Published linear fits of `-log eps_c` against `B` (slope, intercept).
pub const LINEAR_FIT_T1: (&str, &str) = ("0.9705", "-1.9553");
pub const LINEAR_FIT_T3: (&str, &str) = ("0.9641", "-1.6203");
pub const LINEAR_FIT_T4: (&str, &str) = ("0.9637", "-1.6526");

/// Published exponential-correction fits
/// `-log eps_c = const + beta B + amplitude exp(-a B)`
/// as (const, beta, amplitude, a, mean square distance).
pub const EXP_FIT_T1: (&str, &str, &str, &str, &str) =
    ("-2.34630", "1.00359", "1.59684", "0.3302", "0.000210");
pub const EXP_FIT_T3: (&str, &str, &str, &str, &str) =
    ("-1.86364", "1.00308", "1.43766", "0.69671", "0.0000512");
pub const EXP_FIT_T4: (&str, &str, &str, &str, &str) =
    ("-1.84393", "1.00344", "1.82643", "1.0300", "0.0000403");

/// Corrected-fit beta for the Table 11 radii (exp(-B) correction) and the
/// corresponding straight linear fit.
pub const RHO_FIT_T11_BETA: &str = "1.9999989";
pub const RHO_FIT_T11_LINEAR_BETA: &str = "2.00091";
/// Corrected-fit beta for the Table 13 radii ((b + c B) exp(-3B) form).
pub const RHO_FIT_T13_BETA: &str = "2.000000287";
pub const RHO_FIT_T13_LINEAR_BETA: &str = "1.99984";

/// Cells whose printed values disagree with exact recomputation by 2-3
/// units in the last digit while every neighbouring cell matches within
/// one; treated as source misprints and compared at 3 units instead.
pub const PRINTED_OUTLIERS: [(&str, &str); 2] =
    [("[12000,(1)]", "B"), ("[3,4000,(1)]", "rho1")];

pub fn is_printed_outlier(omega: &str, column: &str) -> bool {
    PRINTED_OUTLIERS.iter().any(|&(o, c)| o == omega && c == column)
}

/// Absolute difference below `ulps` units in the last printed digit
/// (plus floating slack).
pub fn within_printed_ulps(value: f64, printed: &str, ulps: f64) -> bool {
    let target: f64 = printed.parse().expect("printed value parses");
    let ulp = {
        let (digits_part, exp) = match printed.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i32>().unwrap()),
            None => (printed, 0),
        };
        let decimals = digits_part.split_once('.').map_or(0, |(_, f)| f.len() as i32);
        10f64.powi(exp - decimals)
    };
    (value - target).abs() <= ulp * ulps * 1.0001
}

/// One unit in the last printed digit.
pub fn within_printed(value: f64, printed: &str) -> bool {
    within_printed_ulps(value, printed, 1.0)
}
