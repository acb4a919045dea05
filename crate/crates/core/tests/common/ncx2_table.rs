#![allow(clippy::excessive_precision)]

//! q_ncx2 against values computed offline with 50-digit arithmetic from the
//! exact Poisson-mixture definition (incomplete gamma differences per term).

/// (K, λ, ξ_L, ξ_H, q)
pub const NCX2_TABLE: &[(u32, f64, f64, f64, f64)] = &[
    (1, 0.0, 0.25, 0.5, -0.31737594439046250817),
    (1, 0.0, 0.7, 1.4, 0.0048449146498199922752),
    (1, 0.0, 1.0, 2.0, 0.21509090691755454469),
    (1, 0.0, 2.0, 4.0, 0.89063288860279342565),
    (1, 0.0, 0.0, 0.5, -0.42208587186791158799),
    (1, 0.0, 1.0, f64::INFINITY, 0.76256763808049060454),
    (1, 0.5, 0.375, 0.75, -0.24901418801311833272),
    (1, 0.5, 1.0499999999999998, 2.0999999999999996, 0.10804786462310887894),
    (1, 0.5, 1.5, 3.0, 0.2996928115297134265),
    (1, 0.5, 3.0, 6.0, 0.78067992421314339608),
    (1, 0.5, 0.0, 0.75, -0.38929464527223638046),
    (1, 0.5, 1.5, f64::INFINITY, 0.61715985430505368349),
    (1, 5.0, 1.5, 3.0, -0.16682384390524037514),
    (1, 5.0, 4.199999999999999, 8.399999999999999, 0.050021700841438918538),
    (1, 5.0, 6.0, 12.0, 0.14790744358568826317),
    (1, 5.0, 12.0, 24.0, 0.37219529370209035331),
    (1, 5.0, 0.0, 3.0, -0.25572966504482948824),
    (1, 5.0, 6.0, f64::INFINITY, 0.20985785259185591108),
    (1, 50.0, 12.75, 25.5, -0.16810348025410157889),
    (1, 50.0, 35.699999999999996, 71.39999999999999, 0.0058577916652939706765),
    (1, 50.0, 51.0, 102.0, 0.059168620208066405573),
    (1, 50.0, 102.0, 204.0, 0.23401995430993382521),
    (1, 50.0, 0.0, 25.5, -0.16914760695055282364),
    (1, 50.0, 51.0, f64::INFINITY, 0.059623986682843153298),
    (1, 150.0, 37.75, 75.5, -0.15539871915059150351),
    (1, 150.0, 105.69999999999999, 211.39999999999998, 0.00122206216063740172),
    (1, 150.0, 151.0, 302.0, 0.033640056017146439656),
    (1, 150.0, 302.0, 604.0, 0.21690312023677224502),
    (1, 150.0, 0.0, 75.5, -0.15539899789662975761),
    (1, 150.0, 151.0, f64::INFINITY, 0.033640110697179440886),
    (1, 500.0, 125.25, 250.5, -0.14937145419098443083),
    (1, 500.0, 350.7, 701.4, 0.0000103005616593422575),
    (1, 500.0, 501.0, 1002.0, 0.018160604791842641567),
    (1, 500.0, 1002.0, 2004.0, 0.21016680160795898313),
    (1, 500.0, 0.0, 250.5, -0.14937145419098443092),
    (1, 500.0, 501.0, f64::INFINITY, 0.01816060479184264157),
    (1, 2000.0, 500.25, 1000.5, -0.14720261205449779567),
    (1, 2000.0, 1400.6999999999998, 2801.3999999999996, 1.235073153319158891e-14),
    (1, 2000.0, 2001.0, 4002.0, 0.0090003401123827499866),
    (1, 2000.0, 4002.0, 8004.0, 0.20788311571398496329),
    (1, 2000.0, 0.0, 1000.5, -0.14720261205449779567),
    (1, 2000.0, 2001.0, f64::INFINITY, 0.0090003401123827499866),
    (4, 0.0, 1.0, 2.0, -0.31063314555439924933),
    (4, 0.0, 2.8, 5.6, 0.0045593047286610202208),
    (4, 0.0, 4.0, 8.0, 0.19741497493002193046),
    (4, 0.0, 8.0, 16.0, 0.76666549871737639823),
    (4, 0.0, 0.0, 2.0, -0.34805279779433320359),
    (4, 0.0, 4.0, f64::INFINITY, 0.33333333333333333333),
    (4, 0.5, 1.125, 2.25, -0.2943179716973037059),
    (4, 0.5, 3.15, 6.3, 0.019296947893243978446),
    (4, 0.5, 4.5, 9.0, 0.19629704949813768494),
    (4, 0.5, 9.0, 18.0, 0.66803491049100263033),
    (4, 0.5, 0.0, 2.25, -0.3342545861730017944),
    (4, 0.5, 4.5, f64::INFINITY, 0.3065239033615265415),
    (4, 5.0, 2.25, 4.5, -0.22302686092784066116),
    (4, 5.0, 6.3, 12.6, 0.028948730500400757715),
    (4, 5.0, 9.0, 18.0, 0.13999061962882159186),
    (4, 5.0, 18.0, 36.0, 0.39259753223770449349),
    (4, 5.0, 0.0, 4.5, -0.2589902115863863895),
    (4, 5.0, 9.0, f64::INFINITY, 0.17786583687897158641),
    (4, 50.0, 13.5, 27.0, -0.17160305784775609773),
    (4, 50.0, 37.8, 75.6, 0.0054065425307448811201),
    (4, 50.0, 54.0, 108.0, 0.058353997896461605384),
    (4, 50.0, 108.0, 216.0, 0.23903931153247596833),
    (4, 50.0, 0.0, 27.0, -0.17227037939025062302),
    (4, 50.0, 54.0, f64::INFINITY, 0.058669313326365477262),
    (4, 150.0, 38.5, 77.0, -0.15666912793835172026),
    (4, 150.0, 107.8, 215.6, 0.0011502981246028708511),
    (4, 150.0, 154.0, 308.0, 0.0334641433843682463),
    (4, 150.0, 308.0, 616.0, 0.21881112803048308651),
    (4, 150.0, 0.0, 77.0, -0.1566693055463891209),
    (4, 150.0, 154.0, f64::INFINITY, 0.033464181419568705749),
    (4, 500.0, 126.0, 252.0, -0.14978990298300610284),
    (4, 500.0, 352.79999999999995, 705.5999999999999, 9.6779998598444737244e-6),
    (4, 500.0, 504.0, 1008.0, 0.018132618776120991168),
    (4, 500.0, 1008.0, 2016.0, 0.21077186498524084392),
    (4, 500.0, 0.0, 252.0, -0.1497899029830061029),
    (4, 500.0, 504.0, f64::INFINITY, 0.01813261877612099117),
    (4, 2000.0, 501.0, 1002.0, -0.14731104046619667763),
    (4, 2000.0, 1402.8, 2805.6, 1.1597657136097352022e-14),
    (4, 2000.0, 2004.0, 4008.0, 0.0089969167481496764299),
    (4, 2000.0, 4008.0, 8016.0, 0.20803738944587977906),
    (4, 2000.0, 0.0, 1002.0, -0.14731104046619667763),
    (4, 2000.0, 2004.0, f64::INFINITY, 0.0089969167481496764299),
    (8, 0.0, 2.0, 4.0, -0.30226890739001951296),
    (8, 0.0, 5.6, 11.2, 0.0041999702357768578575),
    (8, 0.0, 8.0, 16.0, 0.17657639336231963688),
    (8, 0.0, 16.0, 32.0, 0.67331605852705167671),
    (8, 0.0, 0.0, 4.0, -0.31573945755042690708),
    (8, 0.0, 8.0, f64::INFINITY, 0.22535211267605633803),
    (8, 0.5, 2.125, 4.25, -0.29427149962904551134),
    (8, 0.5, 5.949999999999999, 11.899999999999999, 0.0085571357871200283632),
    (8, 0.5, 8.5, 17.0, 0.17123271570783916093),
    (8, 0.5, 17.0, 34.0, 0.61518905726460087776),
    (8, 0.5, 0.0, 4.25, -0.30811863882268720727),
    (8, 0.5, 8.5, f64::INFINITY, 0.21452744678927087403),
    (8, 5.0, 3.25, 6.5, -0.24629486955877712697),
    (8, 5.0, 9.1, 18.2, 0.017028706082599947409),
    (8, 5.0, 13.0, 26.0, 0.1316957620326783372),
    (8, 5.0, 26.0, 52.0, 0.40764666342658675168),
    (8, 5.0, 0.0, 6.5, -0.25952753748680131129),
    (8, 5.0, 13.0, f64::INFINITY, 0.15152774295325331321),
    (8, 50.0, 14.5, 29.0, -0.17576625523301808397),
    (8, 50.0, 40.599999999999994, 81.19999999999999, 0.0048588643078623252288),
    (8, 50.0, 58.0, 116.0, 0.057272901325448868229),
    (8, 50.0, 116.0, 232.0, 0.24540600073127606504),
    (8, 50.0, 0.0, 29.0, -0.17612387370502964616),
    (8, 50.0, 58.0, f64::INFINITY, 0.057464562935714286963),
    (8, 150.0, 39.5, 79.0, -0.1583189673282944009),
    (8, 150.0, 110.6, 221.2, 0.0010602841082519738743),
    (8, 150.0, 158.0, 316.0, 0.033233818655120799896),
    (8, 150.0, 316.0, 632.0, 0.22130891589564980526),
    (8, 150.0, 0.0, 79.0, -0.15831906381446865232),
    (8, 150.0, 158.0, f64::INFINITY, 0.033233842033238856985),
    (8, 500.0, 127.0, 254.0, -0.15034328410676140075),
    (8, 500.0, 355.59999999999997, 711.1999999999999, 8.9037908712641385274e-6),
    (8, 500.0, 508.0, 1016.0, 0.018095504666586277094),
    (8, 500.0, 1016.0, 2032.0, 0.21157394975522637836),
    (8, 500.0, 0.0, 254.0, -0.15034328410676140078),
    (8, 500.0, 508.0, f64::INFINITY, 0.018095504666586277096),
    (8, 2000.0, 502.0, 1004.0, -0.14745530942868834168),
    (8, 2000.0, 1405.6, 2811.2, 1.0663904953893881433e-14),
    (8, 2000.0, 2008.0, 4016.0, 0.0089923583368892812661),
    (8, 2000.0, 4016.0, 8032.0, 0.20824278314814618708),
    (8, 2000.0, 0.0, 1004.0, -0.14745530942868834168),
    (8, 2000.0, 2008.0, f64::INFINITY, 0.0089923583368892812661),
    (24, 0.0, 6.0, 12.0, -0.2799430428816971146),
    (24, 0.0, 16.799999999999997, 33.599999999999994, 0.0029891444277182537868),
    (24, 0.0, 24.0, 48.0, 0.1214290579194519833),
    (24, 0.0, 48.0, 96.0, 0.57014939062293029995),
    (24, 0.0, 0.0, 12.0, -0.28032302565730024463),
    (24, 0.0, 24.0, f64::INFINITY, 0.12388277327166027323),
    (24, 0.5, 6.125, 12.25, -0.27728848600786505114),
    (24, 0.5, 17.15, 34.3, 0.0033897319132111027348),
    (24, 0.5, 24.5, 49.0, 0.11920567755750728324),
    (24, 0.5, 49.0, 98.0, 0.54963111285867897285),
    (24, 0.5, 0.0, 12.25, -0.27767105876968009262),
    (24, 0.5, 24.5, f64::INFINITY, 0.12155365373048125489),
    (24, 5.0, 7.25, 14.5, -0.25693650944870744105),
    (24, 5.0, 20.299999999999997, 40.599999999999994, 0.0052641990260357423674),
    (24, 5.0, 29.0, 58.0, 0.10305931952752532548),
    (24, 5.0, 58.0, 116.0, 0.43867733008182673841),
    (24, 5.0, 0.0, 14.5, -0.25731163121105617652),
    (24, 5.0, 29.0, f64::INFINITY, 0.10461714796233867984),
    (24, 50.0, 18.5, 37.0, -0.18861536717049848508),
    (24, 50.0, 51.8, 103.6, 0.0031740883220800223492),
    (24, 50.0, 74.0, 148.0, 0.053268382539787965397),
    (24, 50.0, 148.0, 296.0, 0.26773071096504865392),
    (24, 50.0, 0.0, 37.0, -0.18863843656656907586),
    (24, 50.0, 74.0, f64::INFINITY, 0.053292704989417866368),
    (24, 150.0, 43.5, 87.0, -0.16444818751231956016),
    (24, 150.0, 121.8, 243.6, 0.00075889311501645751238),
    (24, 150.0, 174.0, 348.0, 0.0323578289410881388),
    (24, 150.0, 348.0, 696.0, 0.23080560832498543697),
    (24, 150.0, 0.0, 87.0, -0.16444819513911033466),
    (24, 150.0, 174.0, f64::INFINITY, 0.032357832182562359054),
    (24, 500.0, 131.0, 262.0, -0.15250590696774974053),
    (24, 500.0, 366.79999999999995, 733.5999999999999, 6.36069660143111864e-6),
    (24, 500.0, 524.0, 1048.0, 0.017949296203772494011),
    (24, 500.0, 1048.0, 2096.0, 0.21473010629027322885),
    (24, 500.0, 0.0, 262.0, -0.15250590696774974053),
    (24, 500.0, 524.0, f64::INFINITY, 0.017949296203772494011),
    (24, 2000.0, 506.0, 1012.0, -0.14802895033909010825),
    (24, 2000.0, 1416.8, 2833.6, 7.6177428043140475239e-15),
    (24, 2000.0, 2024.0, 4048.0, 0.0089741937770405568685),
    (24, 2000.0, 4048.0, 8096.0, 0.20906089639341359896),
    (24, 2000.0, 0.0, 1012.0, -0.14802895033909010825),
    (24, 2000.0, 2024.0, f64::INFINITY, 0.0089741937770405568685),
    (48, 0.0, 12.0, 24.0, -0.26724538067217991203),
    (48, 0.0, 33.599999999999994, 67.19999999999999, 0.0017392199960460447874),
    (48, 0.0, 48.0, 96.0, 0.085765412424373720581),
    (48, 0.0, 96.0, 192.0, 0.53769103626508982786),
    (48, 0.0, 0.0, 24.0, -0.2672473039132808196),
    (48, 0.0, 48.0, f64::INFINITY, 0.08581109282802015675),
    (48, 0.5, 12.125, 24.25, -0.26592119369846452287),
    (48, 0.5, 33.949999999999996, 67.89999999999999, 0.0017931365703676977841),
    (48, 0.5, 48.5, 97.0, 0.084919449849139093029),
    (48, 0.5, 97.0, 194.0, 0.5273272817714585247),
    (48, 0.5, 0.0, 24.25, -0.26592312250824596959),
    (48, 0.5, 48.5, f64::INFINITY, 0.084964111993929173379),
    (48, 5.0, 13.25, 26.5, -0.25502157676082293501),
    (48, 5.0, 37.099999999999994, 74.19999999999999, 0.0021292605884735139155),
    (48, 5.0, 53.0, 106.0, 0.078196547806549406338),
    (48, 5.0, 106.0, 212.0, 0.45903901053497424188),
    (48, 5.0, 0.0, 26.5, -0.2550234816579247832),
    (48, 5.0, 53.0, f64::INFINITY, 0.078231410344090228818),
    (48, 50.0, 24.5, 49.0, -0.20142417604096126291),
    (48, 50.0, 68.6, 137.2, 0.0016821517686541387299),
    (48, 50.0, 98.0, 196.0, 0.048446504846982708398),
    (48, 50.0, 196.0, 392.0, 0.2941705225313932916),
    (48, 50.0, 0.0, 49.0, -0.20142441274148564992),
    (48, 50.0, 98.0, f64::INFINITY, 0.048447447589976767737),
    (48, 150.0, 49.5, 99.0, -0.17240407300548014227),
    (48, 150.0, 138.6, 277.2, 0.0004492755534300606713),
    (48, 150.0, 198.0, 396.0, 0.031164640954662477757),
    (48, 150.0, 396.0, 792.0, 0.24373588739384085548),
    (48, 150.0, 0.0, 99.0, -0.17240407313769589086),
    (48, 150.0, 198.0, f64::INFINITY, 0.0311646411098172939),
    (48, 500.0, 137.0, 274.0, -0.15560329692489786129),
    (48, 500.0, 383.59999999999997, 767.1999999999999, 3.8097287182620199229e-6),
    (48, 500.0, 548.0, 1096.0, 0.017736483250756617382),
    (48, 500.0, 1096.0, 2192.0, 0.21931406998309712368),
    (48, 500.0, 0.0, 274.0, -0.15560329692489786129),
    (48, 500.0, 548.0, f64::INFINITY, 0.017736483250756617382),
    (48, 2000.0, 512.0, 1024.0, -0.14887921720482575445),
    (48, 2000.0, 1433.6, 2867.2, 4.590696389482174599e-15),
    (48, 2000.0, 2048.0, 4096.0, 0.0089471522825365823588),
    (48, 2000.0, 4096.0, 8192.0, 0.21027779294666343069),
    (48, 2000.0, 0.0, 1024.0, -0.14887921720482575445),
    (48, 2000.0, 2048.0, f64::INFINITY, 0.0089471522825365823588),
];
