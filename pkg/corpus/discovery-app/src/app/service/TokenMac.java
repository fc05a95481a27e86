package app.service;

import javax.crypto.Mac;
import javax.crypto.SecretKey;

public class TokenMac {
    private static final String MAC_ALG = "HmacSHA256";

    public byte[] tag(SecretKey key, byte[] token) throws Exception {
        Mac mac = Mac.getInstance(MAC_ALG);
        mac.init(key);
        mac.update(token);
        return mac.doFinal();
    }
}
