package app.util;

/** Plain helpers without any crypto; the prefilter drops this file. */
public class Strings {
    public static String repeat(String s, int n) {
        String out = "";
        for (int i = 0; i < n; i++) {
            out = out + s;
        }
        return out;
    }
}
